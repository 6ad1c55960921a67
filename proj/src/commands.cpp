#include "shadowlab/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shadowlab/attacks.hpp"
#include "shadowlab/color.hpp"
#include "shadowlab/image_io.hpp"
#include "shadowlab/rng.hpp"

namespace fs = std::filesystem;

namespace shadowlab {

namespace {

using json = nlohmann::json;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
}

int class_count_of(const DatasetSplit& ds) {
    int c = 0;
    for (const Sample& s : ds.train) c = std::max(c, s.label + 1);
    for (const Sample& s : ds.test) c = std::max(c, s.label + 1);
    return c;
}

}  // namespace

DatasetSplit load_configured_dataset(const RunConfig& cfg) {
    if (cfg.dataset_kind == DatasetKind::synthetic) return generate_synthetic(cfg.synthetic);
    return load_dataset(cfg.dataset_root, cfg.dataset_manifest);
}

TrainOutputs cmd_train(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    DatasetSplit ds = load_configured_dataset(cfg);
    if (ds.train.empty()) throw ConfigError("train: empty training split");

    std::vector<RgbImage> images;
    std::vector<SignMask> masks;
    std::vector<int> labels;
    for (const Sample& s : ds.train) {
        images.push_back(s.image);
        masks.push_back(s.mask);
        labels.push_back(s.label);
    }

    AugmentConfig aug = cfg.augment;
    aug.profile = cfg.profile;
    AugmentedDataset expanded = expand_dataset(images, masks, labels, aug);

    CnnSpec spec;
    spec.input_channels = cfg.profile.kind == ProfileKind::none ? 3 : 4;
    spec.class_count = class_count_of(ds);
    Checkpoint ckpt = train(expanded.images, expanded.labels, spec, cfg.hyper);

    // benign accuracy on the test split through the inference pipeline
    PipelineClassifier pipeline(ckpt, cfg.profile);
    std::size_t correct = 0;
    for (const Sample& s : ds.test)
        if (pipeline.predict_label(s.image) == s.label) ++correct;
    const double benign_acc =
        ds.test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(ds.test.size());

    TrainOutputs out;
    out.source_size = images.size();
    out.dataset_size = expanded.images.size();
    out.benign_test_accuracy = benign_acc;
    out.checkpoint_path = (fs::path(out_dir) / "checkpoint.slab").string();
    out.log_path = (fs::path(out_dir) / "train_log.json").string();

    // no partial checkpoint on failure: write then rename
    const std::string tmp = out.checkpoint_path + ".tmp";
    save_checkpoint(ckpt, tmp);
    fs::rename(tmp, out.checkpoint_path);

    json log{{"defense", profile_kind_name(cfg.profile.kind)},
             {"input_channels", spec.input_channels},
             {"class_count", spec.class_count},
             {"source_size", out.source_size},
             {"dataset_size", out.dataset_size},
             {"adv", cfg.augment.adv},
             {"transform", cfg.augment.transform},
             {"epochs", cfg.hyper.epochs},
             {"seed", cfg.hyper.seed},
             {"loss_history", ckpt.meta.loss_history},
             {"train_accuracy_history", ckpt.meta.accuracy_history},
             {"benign_test_accuracy", benign_acc}};
    write_text_file(out.log_path, log.dump(2) + "\n");
    return out;
}

EvalReport cmd_attack(const RunConfig& cfg, const std::string& checkpoint_path,
                      const std::string& out_dir) {
    fs::create_directories(out_dir);
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    PipelineClassifier pipeline(ckpt, cfg.profile);

    DatasetSplit ds = load_configured_dataset(cfg);
    if (ds.test.empty()) throw ConfigError("attack: empty test split");

    KSweep sweep{cfg.k_values};
    EvalReport report =
        run_regime(pipeline, ds.test, sweep, cfg.trials, cfg.pso, cfg.eval_seed, cfg.attack_limit);

    write_text_file((fs::path(out_dir) / "report.csv").string(), emit_report_csv({report}));
    write_text_file((fs::path(out_dir) / "report.json").string(), emit_report_json(report));
    write_text_file((fs::path(out_dir) / "robustness.svg").string(),
                    emit_robustness_svg({report}));
    return report;
}

BoundCheckSummary cmd_boundcheck(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::mt19937 rng = make_rng(cfg.boundcheck_seed);

    const int size = kCanonicalSize;
    const SignMask all(size, size, true);
    BoundCheckSummary sum;
    sum.triples = cfg.boundcheck_triples;

    for (long t = 0; t < cfg.boundcheck_triples; ++t) {
        RgbImage img(size, size);
        for (auto& v : img.data) v = static_cast<std::uint8_t>(rng() % 256);
        Polygon poly;
        for (int i = 0; i < 3; ++i)
            poly.vertices.push_back(Point{uniform_in(rng, -0.5 * size, 1.5 * size),
                                          uniform_in(rng, -0.5 * size, 1.5 * size)});
        const double k = cfg.k_values[rng() % cfg.k_values.size()];

        RgbImage shadowed = apply_shadow(img, ShadowParams{k, poly}, all);
        for (NormOrder p : {NormOrder::l2, NormOrder::linf}) {
            const double pert = perturbation_norm(shadowed, img, p);
            const double bound = epsilon_bound(k, p);
            const double ratio = bound > 0.0 ? pert / bound : (pert > 0.0 ? 1e9 : 0.0);
            double& slot = p == NormOrder::l2 ? sum.max_ratio_l2 : sum.max_ratio_linf;
            slot = std::max(slot, ratio);
            if (pert > bound) {
                ++sum.violations;
                std::ostringstream os;
                os << "bound violated: triple " << t << " k=" << k
                   << " p=" << (p == NormOrder::l2 ? "2" : "inf") << " perturbation=" << pert
                   << " bound=" << bound;
                throw BoundViolation(os.str());
            }
        }
    }

    sum.summary_path = (fs::path(out_dir) / "boundcheck.json").string();
    json j{{"triples", sum.triples},
           {"violations", sum.violations},
           {"max_ratio_l2", sum.max_ratio_l2},
           {"max_ratio_linf", sum.max_ratio_linf},
           {"seed", cfg.boundcheck_seed}};
    write_text_file(sum.summary_path, j.dump(2) + "\n");
    return sum;
}

SaliencyOutputs cmd_saliency(const RunConfig& cfg, const std::string& checkpoint_path,
                             const std::string& sample_id, const std::string& out_dir) {
    fs::create_directories(out_dir);
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    PipelineClassifier pipeline(ckpt, cfg.profile);

    DatasetSplit ds = load_configured_dataset(cfg);
    const Sample* sample = nullptr;
    for (const auto& split : {&ds.train, &ds.test}) {
        for (const Sample& s : *split)
            if (s.id == sample_id) sample = &s;
    }
    if (sample == nullptr) throw ConfigError("saliency: unknown sample id '" + sample_id + "'");

    std::mt19937 rng = make_rng(mix_seed(cfg.pso.seed, 0x5a11u));
    Polygon poly;
    for (int i = 0; i < 3; ++i)
        poly.vertices.push_back(
            Point{uniform_in(rng, -0.5 * sample->image.width, 1.5 * sample->image.width),
                  uniform_in(rng, -0.5 * sample->image.height, 1.5 * sample->image.height)});
    RgbImage shadowed = apply_shadow(sample->image, ShadowParams{0.43, poly}, sample->mask);

    SaliencyOutputs out;
    out.benign_path = (fs::path(out_dir) / ("saliency_" + sample_id + "_benign.png")).string();
    out.shadowed_path = (fs::path(out_dir) / ("saliency_" + sample_id + "_shadowed.png")).string();

    SaliencyMap benign = saliency(pipeline.classifier(), pipeline.preprocess(sample->image),
                                  sample->label);
    SaliencyMap shade = saliency(pipeline.classifier(), pipeline.preprocess(shadowed),
                                 sample->label);
    save_gray(out.benign_path, saliency_to_gray(benign));
    save_gray(out.shadowed_path, saliency_to_gray(shade));
    return out;
}

std::string cmd_gen_data(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& image_format) {
    DatasetSplit ds = load_configured_dataset(cfg);
    write_dataset(ds, out_dir, image_format);
    return (fs::path(out_dir) / "manifest.csv").string();
}

void cmd_adapt(const std::string& checkpoint_in, const std::string& checkpoint_out) {
    Checkpoint grown = adapt_first_layer(load_checkpoint(checkpoint_in));
    const std::string tmp = checkpoint_out + ".tmp";
    save_checkpoint(grown, tmp);
    fs::rename(tmp, checkpoint_out);
}

}  // namespace shadowlab
