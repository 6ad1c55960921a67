#pragma once

#include <cstdint>

#include "shadowlab/color.hpp"
#include "shadowlab/image.hpp"
#include "shadowlab/model.hpp"
#include "shadowlab/profiles.hpp"

namespace shadowlab {

// epsilon in normalized [0,1] pixel units (l-infinity ball).
struct EpsBudget {
    double epsilon = 0.0;
    NormOrder p = NormOrder::linf;
};

// Shadow-equivalent budget at k = 0.43: epsilon_bound(0.43, inf) mapped from
// the 0-255 channel scale into normalized units. Larger than 1, i.e. the
// ball covers the whole valid range; the shadow attack is not a small-epsilon
// attack.
double default_epsilon();

// Gradients are taken with respect to the RGB planes only; the binary
// profile plane is non-differentiable and is recomputed from the perturbed
// RGB (quantized copy) after every step, so attackers face the honest
// end-to-end pipeline.
FourChannelImage fgsm(const DifferentiableClassifier& model, const FourChannelImage& img, int label,
                      const EpsBudget& budget, const ProfileConfig& profile);

FourChannelImage pgd(const DifferentiableClassifier& model, const FourChannelImage& img, int label,
                     const EpsBudget& budget, int steps, double step_size, bool random_start,
                     std::uint64_t seed, const ProfileConfig& profile);

}  // namespace shadowlab
