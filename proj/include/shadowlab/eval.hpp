#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shadowlab/augment.hpp"
#include "shadowlab/data.hpp"
#include "shadowlab/model.hpp"
#include "shadowlab/profiles.hpp"
#include "shadowlab/shadow.hpp"

namespace shadowlab {

struct KSweep {
    std::vector<double> values;

    // {0.20, 0.25, 0.30, 0.35, 0.40, 0.43, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70};
    // 0.43 is the median shadow strength of a natural-shadow corpus.
    static KSweep full();
};

struct TrialStat {
    double robustness = 0.0;
    double mean_queries = 0.0;
    int attacked = 0;
    int successes = 0;
};

struct EvalReport {
    std::string defense_label;
    double benign_accuracy = 0.0;
    int trials = 0;
    int excluded = 0;         // samples removed by the dark-image rule
    int retained = 0;         // samples kept after filtering
    int attack_set_size = 0;  // benignly-correct samples actually attacked per trial
    std::uint64_t base_seed = 0;
    std::vector<double> k_values;
    std::vector<double> robustness;    // per k, averaged over trials
    std::vector<double> mean_queries;  // per k, averaged over trials
    std::vector<std::vector<TrialStat>> detail;  // [k][trial]
};

// Exclusion rule for too-dark samples: mean L (0-255 scale) no larger than
// the threshold.
constexpr double kDarkMeanThreshold = 120.0;
bool excluded_by_dark_rule(double mean_l_255);

// Returns (retained samples, excluded count).
std::pair<std::vector<Sample>, int> filter_dark(const std::vector<Sample>& samples);

// Checkpoint plus inference-time preprocessing. The profile channel is
// always recomputed from the presented image (never cached), so shadowed or
// perturbed inputs get their own profile.
class PipelineClassifier {
  public:
    PipelineClassifier(const Checkpoint& ckpt, const ProfileConfig& profile);

    std::vector<double> predict(const RgbImage& img) const;
    int predict_label(const RgbImage& img) const;
    FourChannelImage preprocess(const RgbImage& img) const;
    const CnnClassifier& classifier() const { return model_; }
    const ProfileConfig& profile_config() const { return profile_; }
    std::string defense_name() const;

  private:
    CnnClassifier model_;
    ProfileConfig profile_;
};

// Benign accuracy plus a per-k robustness/query sweep over `trials`
// independently seeded trials (trial seed = base_seed + trial index).
// Attacks run only on benignly-correct retained samples; when attack_limit
// > 0 the attack set is truncated to that many samples (fixed order).
// Robustness over an empty attack set is 0, with a warning.
EvalReport run_regime(const PipelineClassifier& model, const std::vector<Sample>& test_set,
                      const KSweep& sweep, int trials, const PsoConfig& pso,
                      std::uint64_t base_seed, int attack_limit = 0);

struct SaliencyMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // max-normalized to [0,1]; all-zero gradient maps to all-zero
};

// Per-pixel max over channels of |d logit(label) / d x|, max-normalized.
SaliencyMap saliency(const DifferentiableClassifier& model, const FourChannelImage& img, int label);

GrayImage saliency_to_gray(const SaliencyMap& map);

// Report serialization (deterministic bytes for a fixed report).
std::string emit_report_csv(const std::vector<EvalReport>& reports);
std::string emit_report_json(const EvalReport& report);
EvalReport parse_report_json(const std::string& text);
std::string emit_robustness_svg(const std::vector<EvalReport>& reports);

// format is "csv" or "json"; anything else throws.
std::string emit_report(const EvalReport& report, const std::string& format);

}  // namespace shadowlab
