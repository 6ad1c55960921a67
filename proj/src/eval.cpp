#include "shadowlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "shadowlab/color.hpp"
#include "shadowlab/rng.hpp"

namespace shadowlab {

KSweep KSweep::full() {
    return KSweep{{0.20, 0.25, 0.30, 0.35, 0.40, 0.43, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70}};
}

bool excluded_by_dark_rule(double mean_l_255) { return mean_l_255 <= kDarkMeanThreshold; }

std::pair<std::vector<Sample>, int> filter_dark(const std::vector<Sample>& samples) {
    std::vector<Sample> retained;
    int excluded = 0;
    for (const Sample& s : samples) {
        if (excluded_by_dark_rule(mean_l_channel(s.image)))
            ++excluded;
        else
            retained.push_back(s);
    }
    return {std::move(retained), excluded};
}

PipelineClassifier::PipelineClassifier(const Checkpoint& ckpt, const ProfileConfig& profile)
    : model_(ckpt), profile_(profile) {
    const bool wants_profile = profile_.kind != ProfileKind::none;
    if (wants_profile && model_.input_channels() != 4)
        throw std::invalid_argument("PipelineClassifier: profile configured but checkpoint is 3-channel");
    if (!wants_profile && model_.input_channels() != 3)
        throw std::invalid_argument("PipelineClassifier: 4-channel checkpoint needs a profile kind");
}

FourChannelImage PipelineClassifier::preprocess(const RgbImage& img) const {
    if (profile_.kind == ProfileKind::none) {
        FourChannelImage out(img.width, img.height);
        const std::size_t plane = out.plane_size();
        for (std::size_t i = 0; i < plane; ++i) {
            out.data[i] = img.data[i * 3];
            out.data[plane + i] = img.data[i * 3 + 1];
            out.data[2 * plane + i] = img.data[i * 3 + 2];
        }
        return out;
    }
    AugmentConfig cfg;
    cfg.profile = profile_;
    cfg.adv = false;
    cfg.transform = false;
    std::mt19937 rng = make_rng(0);  // unused with both flags off
    SignMask all(img.width, img.height, true);
    return make_example(img, all, cfg, rng);
}

std::vector<double> PipelineClassifier::predict(const RgbImage& img) const {
    std::vector<FourChannelImage> one{preprocess(img)};
    TensorF x = to_input_tensor(one, {0}, model_.input_channels());
    return model_.probabilities_of(x);
}

int PipelineClassifier::predict_label(const RgbImage& img) const {
    std::vector<double> p = predict(img);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::string PipelineClassifier::defense_name() const {
    switch (profile_.kind) {
        case ProfileKind::none: return "undefended";
        case ProfileKind::adathresh: return "adathresh";
        case ProfileKind::edges: return "edges";
    }
    return "unknown";
}

EvalReport run_regime(const PipelineClassifier& model, const std::vector<Sample>& test_set,
                      const KSweep& sweep, int trials, const PsoConfig& pso,
                      std::uint64_t base_seed, int attack_limit) {
    if (trials < 1) throw std::invalid_argument("run_regime: trials must be >= 1");
    auto [retained, excluded] = filter_dark(test_set);
    if (retained.empty()) throw std::invalid_argument("run_regime: test set empty after dark filter");

    EvalReport report;
    report.defense_label = model.defense_name();
    report.trials = trials;
    report.excluded = excluded;
    report.retained = static_cast<int>(retained.size());
    report.base_seed = base_seed;
    report.k_values = sweep.values;

    // Benign accuracy over the retained set; only correct samples get attacked.
    std::vector<std::size_t> correct_idx;
    for (std::size_t i = 0; i < retained.size(); ++i) {
        if (model.predict_label(retained[i].image) == retained[i].label) correct_idx.push_back(i);
    }
    report.benign_accuracy =
        static_cast<double>(correct_idx.size()) / static_cast<double>(retained.size());

    if (attack_limit > 0 && correct_idx.size() > static_cast<std::size_t>(attack_limit)) {
        // deterministic stride subsample; spreads across the (class-ordered)
        // test set instead of truncating to the leading classes
        std::vector<std::size_t> strided;
        const std::size_t n = correct_idx.size();
        const std::size_t limit = static_cast<std::size_t>(attack_limit);
        for (std::size_t i = 0; i < limit; ++i) strided.push_back(correct_idx[i * n / limit]);
        correct_idx = std::move(strided);
    }
    report.attack_set_size = static_cast<int>(correct_idx.size());
    if (correct_idx.empty())
        std::cerr << "run_regime: warning: no benignly-correct samples to attack; robustness "
                     "reported as 0\n";

    const std::int64_t n_attack = static_cast<std::int64_t>(correct_idx.size());
    for (std::size_t ki = 0; ki < sweep.values.size(); ++ki) {
        const double k = sweep.values[ki];
        std::vector<TrialStat> per_trial;
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t trial_seed = base_seed + static_cast<std::uint64_t>(t);
            std::vector<unsigned char> success(correct_idx.size(), 0);
            std::vector<long> queries(correct_idx.size(), 0);
#pragma omp parallel for schedule(dynamic)
            for (std::int64_t s = 0; s < n_attack; ++s) {
                const Sample& sample = retained[correct_idx[static_cast<std::size_t>(s)]];
                QueryingClassifier qc([&model](const RgbImage& img) { return model.predict(img); });
                PsoConfig cfg = pso;
                cfg.seed = mix_seed(trial_seed, ki, static_cast<std::uint64_t>(s));
                AttackResult res = pso_attack(sample.image, sample.label, qc, k, sample.mask, cfg);
                success[static_cast<std::size_t>(s)] = res.success ? 1 : 0;
                queries[static_cast<std::size_t>(s)] = res.queries;
            }
            TrialStat stat;
            stat.attacked = static_cast<int>(correct_idx.size());
            for (std::size_t s = 0; s < correct_idx.size(); ++s) {
                stat.successes += success[s];
                stat.mean_queries += static_cast<double>(queries[s]);
            }
            if (stat.attacked > 0) {
                stat.robustness = 1.0 - static_cast<double>(stat.successes) / stat.attacked;
                stat.mean_queries /= stat.attacked;
            }
            per_trial.push_back(stat);
        }
        double rob = 0.0, mq = 0.0;
        for (const TrialStat& st : per_trial) {
            rob += st.robustness;
            mq += st.mean_queries;
        }
        report.robustness.push_back(rob / trials);
        report.mean_queries.push_back(mq / trials);
        report.detail.push_back(std::move(per_trial));
    }
    return report;
}

SaliencyMap saliency(const DifferentiableClassifier& model, const FourChannelImage& img, int label) {
    TensorF x({1, 4, img.height, img.width});
    for (std::size_t i = 0; i < img.data.size(); ++i) x.data[i] = img.data[i] / 255.0f;
    if (model.input_channels() == 3) {
        TensorF x3({1, 3, img.height, img.width});
        std::copy(x.data.begin(), x.data.begin() + static_cast<std::ptrdiff_t>(3 * img.plane_size()),
                  x3.data.begin());
        x = std::move(x3);
    }
    TensorF g = model.logit_input_gradient(x, label);

    SaliencyMap map;
    map.width = img.width;
    map.height = img.height;
    map.values.assign(img.plane_size(), 0.0);
    const std::size_t plane = img.plane_size();
    const int channels = model.input_channels();
    double peak = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
        double best = 0.0;
        for (int c = 0; c < channels; ++c)
            best = std::max(best, std::abs(static_cast<double>(g.data[c * plane + i])));
        map.values[i] = best;
        peak = std::max(peak, best);
    }
    if (peak > 0.0)
        for (auto& v : map.values) v /= peak;
    return map;
}

GrayImage saliency_to_gray(const SaliencyMap& map) {
    GrayImage out(map.width, map.height);
    for (std::size_t i = 0; i < map.values.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(std::clamp(round_half_away(map.values[i] * 255.0), 0, 255));
    return out;
}

}  // namespace shadowlab
