#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shadowlab/image.hpp"

namespace shadowlab {

struct Sample {
    RgbImage image;  // 32x32 after preprocessing
    int label = 0;
    SignMask mask;
    std::string id;
};

// Desk-scale stand-in for a traffic-sign corpus: classes are border shape
// (circle / triangle / octagon / square) crossed with an interior glyph, so
// the class signal lives inside the sign boundary. Fill and background
// colors are jittered independently of the class.
struct SyntheticSpec {
    int class_count = 8;  // 2..8
    int per_class = 64;
    double bg_jitter = 0.25;  // background color jitter range, fraction of 255
    std::uint64_t seed = 0;
};

struct DatasetSplit {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

// Deterministic given spec.seed; emits analytic masks and an 80/20 per-class
// train/test split.
DatasetSplit generate_synthetic(const SyntheticSpec& spec);

// Manifest-driven loader. Manifest CSV columns: id, relative_path, label,
// mask_path (may be empty), split in {train,test}. Images are resized to
// 32x32 (bilinear); absent masks default to all-true.
DatasetSplit load_dataset(const std::string& root, const std::string& manifest);

// Writes images (given extension: "ppm" or "png"), grayscale PNG mask
// sidecars, and manifest.csv under dir.
void write_dataset(const DatasetSplit& ds, const std::string& dir, const std::string& image_format);

constexpr int kCanonicalSize = 32;

}  // namespace shadowlab
