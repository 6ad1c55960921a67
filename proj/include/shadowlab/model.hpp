#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shadowlab/image.hpp"
#include "shadowlab/tensor.hpp"

namespace shadowlab {

// Fixed backbone: conv3x3x32 / relu / maxpool2 / conv3x3x64 / relu /
// maxpool2 / dense 256 / relu / dense C, on 32x32 inputs.
struct CnnSpec {
    int input_channels = 3;  // 3 or 4
    int class_count = 0;
    static constexpr int input_size = 32;
};

enum class Activation { relu, identity };

// Internal sizing knobs; the production preset comes from CnnSpec, tiny
// configurations exist for gradient checking and hand-computed tests.
struct NetConfig {
    int in_channels = 3;
    int in_size = 32;  // divisible by 4
    int conv1_filters = 32;
    int conv2_filters = 64;
    int fc_width = 256;
    int classes = 0;
    Activation activation = Activation::relu;

    static NetConfig from_spec(const CnnSpec& spec);
    std::size_t param_count() const;
    int flat_width() const { return conv2_filters * (in_size / 4) * (in_size / 4); }
};

template <typename T>
class CnnT {
  public:
    struct Params {
        TensorT<T> conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;
    };

    explicit CnnT(const NetConfig& cfg);

    const NetConfig& config() const { return cfg_; }
    Params& params() { return params_; }
    const Params& params() const { return params_; }
    Params& grads() { return grads_; }

    // He-normal conv/fc weights, zero biases; portable Box-Muller stream.
    void init_weights(std::uint64_t seed);

    // Softmax probabilities [N, C]; throws on channel-count mismatch.
    TensorT<T> probabilities(const TensorT<T>& batch) const;
    TensorT<T> logits(const TensorT<T>& batch) const;

    // Mean cross-entropy over the batch.
    T loss(const TensorT<T>& batch, const std::vector<int>& labels) const;

    // Forward + backward for training; accumulates into grads(); returns the
    // mean loss. Optionally emits d(loss)/d(input) and the number of
    // correctly classified samples in the batch.
    T forward_backward(const TensorT<T>& batch, const std::vector<int>& labels,
                       TensorT<T>* input_grad = nullptr, std::size_t* correct_count = nullptr);

    // v <- momentum * v + g; w <- w - lr * v
    void sgd_step(T lr, T momentum);

    // d(loss)/d(input) and d(logit_class)/d(input) for a single sample,
    // without touching training state.
    TensorT<T> loss_input_gradient(const TensorT<T>& single, int label) const;
    TensorT<T> logit_input_gradient(const TensorT<T>& single, int class_id) const;

    // Fixed-order named views over parameters and their gradients.
    std::vector<std::pair<std::string, TensorT<T>*>> named_params();
    std::vector<std::pair<std::string, const TensorT<T>*>> named_params() const;
    std::vector<std::pair<std::string, TensorT<T>*>> named_grads();

  private:
    struct Workspace;
    void forward_internal(const TensorT<T>& batch, Workspace& ws) const;
    void backward_internal(const TensorT<T>& batch, Workspace& ws, const TensorT<T>& dlogits,
                           Params& grads, TensorT<T>* input_grad) const;

    NetConfig cfg_;
    Params params_;
    Params grads_;
    Params momentum_;
};

using Cnn = CnnT<float>;

struct TrainMeta {
    int epochs = 0;
    std::uint64_t seed = 0;
    std::vector<double> loss_history;  // mean loss per epoch
    std::vector<double> accuracy_history;
};

struct TrainHyper {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 30;
    int batch_size = 64;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    CnnSpec spec;
    std::vector<std::pair<std::string, TensorF>> weights;  // fixed order
    TrainMeta meta;
};

// Batch tensor from four-channel examples: the first `channels` planes,
// scaled to [0,1] by dividing by 255.
TensorF to_input_tensor(const std::vector<FourChannelImage>& images,
                        const std::vector<std::size_t>& indices, int channels);

// Mini-batch SGD with momentum over the full dataset; deterministic given
// hyper.seed (seeded init and seeded per-epoch shuffles).
Checkpoint train(const std::vector<FourChannelImage>& images, const std::vector<int>& labels,
                 const CnnSpec& spec, const TrainHyper& hyper);

Cnn make_net(const Checkpoint& ckpt);
Checkpoint snapshot(const Cnn& net, const CnnSpec& spec, TrainMeta meta);

// Self-describing container: magic + version + JSON directory (spec, meta,
// tensor names/shapes/offsets) + little-endian IEEE-754 float32 payload.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Grows the first conv layer 3 -> 4 input channels; the new slice is the
// mean of the existing three, everything else is copied. Throws if the
// checkpoint is already 4-channel.
Checkpoint adapt_first_layer(const Checkpoint& ckpt);

// Central-difference gradient validation (h = 1e-5) on `num_checks`
// randomly selected parameters; returns the max relative error. When
// tamper_index >= 0, that checked parameter's analytic gradient is
// deliberately corrupted (fixture proving the check detects bugs).
double gradient_check(CnnT<double>& net, const TensorT<double>& batch,
                      const std::vector<int>& labels, int num_checks, std::uint64_t seed,
                      int tamper_index = -1);

// Gradient-based classifier surface used by the white-box attacks and the
// saliency diagnostic; implemented by CnnClassifier and by test toys.
class DifferentiableClassifier {
  public:
    virtual ~DifferentiableClassifier() = default;
    virtual int num_classes() const = 0;
    virtual int input_channels() const = 0;
    virtual std::vector<double> probabilities_of(const TensorF& single) const = 0;
    virtual TensorF loss_input_gradient(const TensorF& single, int label) const = 0;
    virtual TensorF logit_input_gradient(const TensorF& single, int class_id) const = 0;
};

class CnnClassifier : public DifferentiableClassifier {
  public:
    explicit CnnClassifier(const Checkpoint& ckpt);
    int num_classes() const override { return net_.config().classes; }
    int input_channels() const override { return net_.config().in_channels; }
    std::vector<double> probabilities_of(const TensorF& single) const override;
    TensorF loss_input_gradient(const TensorF& single, int label) const override;
    TensorF logit_input_gradient(const TensorF& single, int class_id) const override;
    const Cnn& net() const { return net_; }

  private:
    Cnn net_;
};

}  // namespace shadowlab
