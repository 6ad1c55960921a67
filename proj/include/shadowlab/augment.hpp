#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "shadowlab/image.hpp"
#include "shadowlab/profiles.hpp"

namespace shadowlab {

struct TransformRanges {
    double rotation_deg = 15.0;   // sampled in +-rotation_deg
    double shear = 0.1;           // sampled in +-shear
    double translate_frac = 0.1;  // sampled in +-translate_frac of width/height
};

struct AugmentConfig {
    ProfileConfig profile;
    bool adv = false;
    bool transform = false;
    double k_min = 0.2;  // shadow strength range, within (0,1]
    double k_max = 0.7;
    TransformRanges ranges;
    std::uint64_t seed = 0;
    double polygon_margin = 0.5;  // random-triangle vertex box margin
};

// One defense example: optional random shadow (uniform k, random triangle),
// profile of the possibly-shadowed image as channel 4, then an optional
// random affine applied to all four channels (bilinear RGB, nearest-neighbor
// profile). Pure given the rng state.
FourChannelImage make_example(const RgbImage& img, const SignMask& mask, const AugmentConfig& cfg,
                              std::mt19937& rng);

// Dataset expansion over the flag lattice: always the (adv=F, transform=F)
// pass, plus the passes enabled by cfg.adv / cfg.transform. Both flags on
// yields the four-pass quadruplication. Labels are preserved; per-sample rng
// streams are derived from (cfg.seed, pass, sample index).
struct AugmentedDataset {
    std::vector<FourChannelImage> images;
    std::vector<int> labels;
};

AugmentedDataset expand_dataset(const std::vector<RgbImage>& images,
                                const std::vector<SignMask>& masks, const std::vector<int>& labels,
                                const AugmentConfig& cfg);

// The four-pass expansion (adv, transform) in {FF, FT, TF, TT}; output is
// exactly 4x the input.
AugmentedDataset quadruplicate(const std::vector<RgbImage>& images,
                               const std::vector<SignMask>& masks, const std::vector<int>& labels,
                               const AugmentConfig& cfg);

}  // namespace shadowlab
