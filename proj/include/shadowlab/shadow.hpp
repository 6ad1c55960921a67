#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "shadowlab/geometry.hpp"
#include "shadowlab/image.hpp"

namespace shadowlab {

// Shadow strength k in (0,1]; lower k is a darker shadow.
struct ShadowParams {
    double k = 1.0;
    Polygon polygon;
};

// Multiplies L by k (in LAB space) for pixels inside polygon-and-mask;
// pixels outside the region are copied verbatim from the source, and k = 1
// returns the source unchanged.
RgbImage apply_shadow(const RgbImage& img, const ShadowParams& params, const SignMask& mask);

struct Bounds {
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

struct PsoConfig {
    int particles = 10;
    int iterations = 50;
    double inertia = 0.73;
    double cognitive = 1.49;
    double social = 1.49;
    int vertex_count = 3;
    std::uint64_t seed = 0;
    double margin = 0.5;  // vertex box: image bounds extended by this fraction per side

    Bounds bounds_for(int width, int height) const {
        return Bounds{-margin * width, (1.0 + margin) * width, -margin * height,
                      (1.0 + margin) * height};
    }
};

// Wraps a probability-emitting classifier and counts every request.
class QueryingClassifier {
  public:
    using PredictFn = std::function<std::vector<double>(const RgbImage&)>;

    explicit QueryingClassifier(PredictFn fn) : fn_(std::move(fn)) {}

    std::vector<double> predict(const RgbImage& img) {
        count_.fetch_add(1, std::memory_order_relaxed);
        return fn_(img);
    }

    long query_count() const { return count_.load(std::memory_order_relaxed); }

  private:
    PredictFn fn_;
    std::atomic<long> count_{0};
};

struct AttackResult {
    bool success = false;
    Polygon best_polygon;
    long queries = 0;
    double final_confidence = 0.0;  // model probability of the true label
    int predicted_label = -1;
};

// Black-box polygon search: standard PSO over 2s vertex coordinates
// minimizing the model's confidence in `label` on the shadowed image.
// Early-exits on the first misclassification; deterministic given cfg.seed.
// Query count is at most particles * (iterations + 1).
AttackResult pso_attack(const RgbImage& img, int label, QueryingClassifier& model, double k,
                        const SignMask& mask, const PsoConfig& cfg);

}  // namespace shadowlab
