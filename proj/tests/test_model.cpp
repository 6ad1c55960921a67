#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "shadowlab/model.hpp"
#include "support/oracles.hpp"

using namespace shadowlab;

namespace {

NetConfig tiny_config(int in_channels = 1, int in_size = 8, int classes = 3,
                      Activation act = Activation::relu) {
    NetConfig cfg;
    cfg.in_channels = in_channels;
    cfg.in_size = in_size;
    cfg.conv1_filters = 2;
    cfg.conv2_filters = 3;
    cfg.fc_width = 8;
    cfg.classes = classes;
    cfg.activation = act;
    return cfg;
}

template <typename T>
TensorT<T> random_batch(std::mt19937& rng, int n, int channels, int size) {
    TensorT<T> x({n, channels, size, size});
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (auto& v : x.data) v = static_cast<T>(d(rng));
    return x;
}

std::vector<FourChannelImage> random_examples(std::mt19937& rng, int n, int size) {
    std::vector<FourChannelImage> out;
    for (int i = 0; i < n; ++i) {
        FourChannelImage img(size, size);
        for (std::size_t j = 0; j < img.data.size(); ++j) img.data[j] = static_cast<float>(rng() % 256);
        const std::size_t plane = img.plane_size();
        for (std::size_t j = 0; j < plane; ++j) img.data[3 * plane + j] = (rng() % 2) ? 255.0f : 0.0f;
        out.push_back(std::move(img));
    }
    return out;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("softmax rows sum to one") {
    std::mt19937 rng(1);
    Cnn net(tiny_config(1, 8, 4));
    net.init_weights(3);
    TensorF batch = random_batch<float>(rng, 5, 1, 8);
    TensorF probs = net.probabilities(batch);
    for (int i = 0; i < 5; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) sum += probs.data[static_cast<std::size_t>(i) * 4 + j];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("zero-initialized network outputs the uniform distribution") {
    std::mt19937 rng(2);
    Cnn net(tiny_config(1, 8, 5));  // weights default to zero
    TensorF batch = random_batch<float>(rng, 3, 1, 8);
    TensorF probs = net.probabilities(batch);
    for (float p : probs.data) CHECK(p == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("forward matches the brute-force oracle on a tiny network") {
    std::mt19937 rng(3);
    CnnT<double> net(tiny_config(1, 4, 2));
    net.init_weights(17);
    TensorD x = random_batch<double>(rng, 1, 1, 4);
    TensorD logits = net.logits(x);
    std::vector<double> golden = testing::oracle_forward_logits(net, x);
    REQUIRE(logits.numel() == golden.size());
    for (std::size_t i = 0; i < golden.size(); ++i)
        CHECK(logits.data[i] == doctest::Approx(golden[i]).epsilon(1e-9));
}

TEST_CASE("forward rejects channel mismatches") {
    std::mt19937 rng(4);
    Cnn net(tiny_config(1, 8, 3));
    TensorF wrong = random_batch<float>(rng, 2, 2, 8);
    CHECK_THROWS_AS(net.probabilities(wrong), std::invalid_argument);
}

TEST_CASE("training memorizes a small synthetic dataset") {
    std::mt19937 rng(5);
    std::vector<FourChannelImage> images = random_examples(rng, 32, 32);
    std::vector<int> labels;
    for (int i = 0; i < 32; ++i) labels.push_back(i % 2);

    CnnSpec spec;
    spec.input_channels = 4;
    spec.class_count = 2;
    TrainHyper hyper;
    hyper.epochs = 200;
    hyper.seed = 11;
    hyper.batch_size = 8;
    hyper.learning_rate = 0.02;
    Checkpoint ckpt = train(images, labels, spec, hyper);

    Cnn net = make_net(ckpt);
    std::vector<std::size_t> idx(images.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    TensorF batch = to_input_tensor(images, idx, 4);
    TensorF probs = net.probabilities(batch);
    int correct = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        int argmax = probs.data[i * 2] > probs.data[i * 2 + 1] ? 0 : 1;
        correct += argmax == labels[i];
    }
    CHECK(correct >= 32);  // >= 99% of 32 samples means all of them
}

TEST_CASE("learning rate zero leaves the weights at initialization") {
    std::mt19937 rng(6);
    std::vector<FourChannelImage> images = random_examples(rng, 8, 32);
    std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1};
    CnnSpec spec;
    spec.input_channels = 3;
    spec.class_count = 2;
    TrainHyper hyper;
    hyper.epochs = 3;
    hyper.learning_rate = 0.0;
    hyper.seed = 4;
    Checkpoint trained = train(images, labels, spec, hyper);

    Cnn reference(NetConfig::from_spec(spec));
    reference.init_weights(4);
    auto ref_params = reference.named_params();
    REQUIRE(ref_params.size() == trained.weights.size());
    for (std::size_t i = 0; i < ref_params.size(); ++i)
        CHECK(ref_params[i].second->data == trained.weights[i].second.data);
}

TEST_CASE("identical seeds produce bit-identical checkpoints") {
    std::mt19937 rng(7);
    std::vector<FourChannelImage> images = random_examples(rng, 12, 32);
    std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
    CnnSpec spec;
    spec.input_channels = 4;
    spec.class_count = 3;
    TrainHyper hyper;
    hyper.epochs = 2;
    hyper.seed = 123;
    Checkpoint a = train(images, labels, spec, hyper);
    Checkpoint b = train(images, labels, spec, hyper);
    REQUIRE(a.weights.size() == b.weights.size());
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        CHECK(a.weights[i].second.data == b.weights[i].second.data);
    CHECK(a.meta.loss_history == b.meta.loss_history);
}

TEST_CASE("train validates labels") {
    std::mt19937 rng(8);
    std::vector<FourChannelImage> images = random_examples(rng, 4, 32);
    std::vector<int> labels{0, 1, 2, 5};
    CnnSpec spec;
    spec.input_channels = 3;
    spec.class_count = 3;
    TrainHyper hyper;
    hyper.epochs = 1;
    CHECK_THROWS_AS(train(images, labels, spec, hyper), std::out_of_range);
    CHECK_THROWS_AS(train({}, {}, spec, hyper), std::invalid_argument);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    std::mt19937 rng(9);
    std::vector<FourChannelImage> images = random_examples(rng, 6, 32);
    std::vector<int> labels{0, 1, 0, 1, 0, 1};
    CnnSpec spec;
    spec.input_channels = 4;
    spec.class_count = 2;
    TrainHyper hyper;
    hyper.epochs = 1;
    hyper.seed = 31;
    Checkpoint ckpt = train(images, labels, spec, hyper);

    const std::string path = temp_path("slab_test_ckpt.slab");
    save_checkpoint(ckpt, path);
    Checkpoint loaded = load_checkpoint(path);

    CHECK(loaded.spec.input_channels == ckpt.spec.input_channels);
    CHECK(loaded.spec.class_count == ckpt.spec.class_count);
    CHECK(loaded.meta.loss_history == ckpt.meta.loss_history);
    REQUIRE(loaded.weights.size() == ckpt.weights.size());
    for (std::size_t i = 0; i < ckpt.weights.size(); ++i) {
        CHECK(loaded.weights[i].first == ckpt.weights[i].first);
        CHECK(loaded.weights[i].second.data == ckpt.weights[i].second.data);
    }

    // forward after reload is bit-identical
    std::vector<std::size_t> idx{0, 1, 2};
    TensorF batch = to_input_tensor(images, idx, 4);
    TensorF before = make_net(ckpt).probabilities(batch);
    TensorF after = make_net(loaded).probabilities(batch);
    CHECK(before.data == after.data);

    // a second save produces byte-identical files
    const std::string path2 = temp_path("slab_test_ckpt2.slab");
    save_checkpoint(loaded, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("adapt_first_layer grows only the first conv layer") {
    Cnn net(NetConfig::from_spec(CnnSpec{3, 4}));
    net.init_weights(77);
    Checkpoint ckpt = snapshot(net, CnnSpec{3, 4}, {});
    Checkpoint grown = adapt_first_layer(ckpt);

    CHECK(grown.spec.input_channels == 4);
    std::size_t before = 0, after = 0;
    for (const auto& [name, t] : ckpt.weights) before += t.numel();
    for (const auto& [name, t] : grown.weights) after += t.numel();
    CHECK(after - before == 32u * 3 * 3);  // kernel_h * kernel_w * filters

    for (std::size_t i = 0; i < ckpt.weights.size(); ++i) {
        if (ckpt.weights[i].first == "conv1.weight") {
            const TensorF& w3 = ckpt.weights[i].second;
            const TensorF& w4 = grown.weights[i].second;
            REQUIRE(w4.shape == std::vector<int>{32, 4, 3, 3});
            for (int f = 0; f < 32; ++f)
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) {
                        float mean = 0.0f;
                        for (int c = 0; c < 3; ++c) {
                            const float v = w3.data[((f * 3 + c) * 3 + ky) * 3 + kx];
                            CHECK(w4.data[((f * 4 + c) * 3 + ky) * 3 + kx] == v);
                            mean += v;
                        }
                        CHECK(w4.data[((f * 4 + 3) * 3 + ky) * 3 + kx] ==
                              doctest::Approx(mean / 3.0f));
                    }
        } else {
            CHECK(ckpt.weights[i].second.data == grown.weights[i].second.data);
        }
    }

    CHECK_THROWS_AS(adapt_first_layer(grown), std::invalid_argument);
}

TEST_CASE("analytic gradients agree with central differences") {
    std::mt19937 rng(10);
    CnnT<double> net(tiny_config(2, 8, 3));
    REQUIRE(net.config().param_count() <= 5000);
    net.init_weights(5);
    TensorD batch = random_batch<double>(rng, 3, 2, 8);
    std::vector<int> labels{0, 1, 2};
    const double err = gradient_check(net, batch, labels, 120, 42);
    CHECK(err <= 1e-4);
}

TEST_CASE("gradient check detects a corrupted gradient") {
    std::mt19937 rng(11);
    CnnT<double> net(tiny_config(1, 8, 2));
    net.init_weights(6);
    TensorD batch = random_batch<double>(rng, 2, 1, 8);
    std::vector<int> labels{0, 1};
    const double err = gradient_check(net, batch, labels, 50, 43, /*tamper_index=*/0);
    CHECK(err > 1e-2);
}

TEST_CASE("identity-activation network gradients are exact up to truncation") {
    std::mt19937 rng(12);
    CnnT<double> net(tiny_config(1, 8, 2, Activation::identity));
    net.init_weights(7);
    TensorD batch = random_batch<double>(rng, 2, 1, 8);
    std::vector<int> labels{0, 1};
    const double err = gradient_check(net, batch, labels, 100, 44);
    CHECK(err <= 1e-7);
}
