#include "shadowlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shadowlab/rng.hpp"

namespace shadowlab {

namespace {

TensorF to_tensor(const FourChannelImage& img) {
    TensorF x({1, 4, img.height, img.width});
    for (std::size_t i = 0; i < img.data.size(); ++i) x.data[i] = img.data[i] / 255.0f;
    return x;
}

RgbImage quantize_rgb(const FourChannelImage& img) {
    RgbImage out(img.width, img.height);
    const std::size_t plane = img.plane_size();
    for (std::size_t i = 0; i < plane; ++i) {
        for (int c = 0; c < 3; ++c) {
            out.data[i * 3 + c] = static_cast<std::uint8_t>(
                std::clamp(round_half_away(img.data[c * plane + i]), 0, 255));
        }
    }
    return out;
}

void recompute_profile(FourChannelImage& img, const ProfileConfig& cfg) {
    ProfileMap p = make_profile(quantize_rgb(img), cfg);
    const std::size_t plane = img.plane_size();
    for (std::size_t i = 0; i < plane; ++i) img.data[3 * plane + i] = p.data[i];
}

}  // namespace

double default_epsilon() { return epsilon_bound(0.43, NormOrder::linf) / 255.0; }

FourChannelImage pgd(const DifferentiableClassifier& model, const FourChannelImage& img, int label,
                     const EpsBudget& budget, int steps, double step_size, bool random_start,
                     std::uint64_t seed, const ProfileConfig& profile) {
    if (model.input_channels() != 4) throw std::invalid_argument("pgd: model must accept 4 channels");
    if (steps < 1) throw std::invalid_argument("pgd: steps must be >= 1");
    if (step_size < 0.0) throw std::invalid_argument("pgd: step_size must be >= 0");
    if (budget.epsilon < 0.0) throw std::invalid_argument("pgd: epsilon must be >= 0");

    const float eps = static_cast<float>(budget.epsilon * 255.0);
    const float step = static_cast<float>(step_size * 255.0);
    const std::size_t plane = img.plane_size();

    FourChannelImage cur = img;
    if (random_start && eps > 0.0f) {
        std::mt19937 rng = make_rng(mix_seed(seed, 0xadf5u));
        for (std::size_t i = 0; i < 3 * plane; ++i) {
            float delta = static_cast<float>(uniform_in(rng, -eps, eps));
            cur.data[i] = std::clamp(img.data[i] + delta, 0.0f, 255.0f);
        }
        recompute_profile(cur, profile);
    }

    for (int it = 0; it < steps; ++it) {
        TensorF grad = model.loss_input_gradient(to_tensor(cur), label);
        for (std::size_t i = 0; i < 3 * plane; ++i) {
            const float g = grad.data[i];
            const float s = g > 0.0f ? 1.0f : (g < 0.0f ? -1.0f : 0.0f);
            float v = cur.data[i] + step * s;
            v = std::clamp(v, img.data[i] - eps, img.data[i] + eps);  // l-inf projection
            v = std::clamp(v, 0.0f, 255.0f);
            cur.data[i] = v;
        }
        recompute_profile(cur, profile);
    }
    return cur;
}

FourChannelImage fgsm(const DifferentiableClassifier& model, const FourChannelImage& img, int label,
                      const EpsBudget& budget, const ProfileConfig& profile) {
    return pgd(model, img, label, budget, 1, budget.epsilon, false, 0, profile);
}

}  // namespace shadowlab
