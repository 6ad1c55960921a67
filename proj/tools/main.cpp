#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shadowlab/commands.hpp"
#include "shadowlab/run_config.hpp"

using namespace shadowlab;

namespace {

// Precedence: command-line flag > SHADOWLAB_OUT > config file.
std::string resolve_out_dir(const RunConfig& cfg, const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SHADOWLAB_OUT"); env != nullptr && *env != '\0') return env;
    return cfg.output_dir;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    // optional overrides; NaN / -1 / empty mean "not set"
    std::string profile_kind;
    int epochs = -1;
    int trials = -1;
    int attack_limit = -1;
    long triples = -1;
    std::vector<double> k_values;
    long long seed = -1;
    std::string adv;        // "true"/"false", empty = keep config
    std::string transform;  // likewise
};

bool parse_bool_opt(const std::string& v, const char* name) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw shadowlab::ConfigError(std::string("flag --") + name + " expects true or false");
}

RunConfig load_with_overrides(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    if (cfg.k_values.empty()) cfg.k_values = KSweep::full().values;
    if (!o.profile_kind.empty()) cfg.profile.kind = profile_kind_from_name(o.profile_kind);
    if (o.epochs >= 0) cfg.hyper.epochs = o.epochs;
    if (o.trials >= 0) cfg.trials = o.trials;
    if (o.attack_limit >= 0) cfg.attack_limit = o.attack_limit;
    if (o.triples >= 0) cfg.boundcheck_triples = o.triples;
    if (!o.k_values.empty()) cfg.k_values = o.k_values;
    if (o.seed >= 0) {
        cfg.hyper.seed = static_cast<std::uint64_t>(o.seed);
        cfg.augment.seed = static_cast<std::uint64_t>(o.seed);
        cfg.synthetic.seed = static_cast<std::uint64_t>(o.seed);
        cfg.eval_seed = static_cast<std::uint64_t>(o.seed);
        cfg.boundcheck_seed = static_cast<std::uint64_t>(o.seed);
        cfg.pso.seed = static_cast<std::uint64_t>(o.seed);
    }
    if (!o.adv.empty()) cfg.augment.adv = parse_bool_opt(o.adv, "adv");
    if (!o.transform.empty()) cfg.augment.transform = parse_bool_opt(o.transform, "transform");
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    auto* copt = cmd->add_option("-c,--config", o.config_path, "JSON run configuration");
    if (config_required) copt->required();
    cmd->add_option("-o,--output-dir", o.out_dir, "output directory (overrides env and config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow attacks and profile-map defenses for road-sign classifiers"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string checkpoint_path, checkpoint_out, sample_id, image_format = "png";

    auto* gen = app.add_subcommand("gen-data", "render the synthetic dataset to disk");
    add_common(gen, o);
    gen->add_option("--format", image_format, "image format: png or ppm");

    auto* tr = app.add_subcommand("train", "expand the dataset per flags and train a model");
    add_common(tr, o);
    tr->add_option("--profile", o.profile_kind, "profile kind: none, adathresh, edges");
    tr->add_option("--epochs", o.epochs, "override training epochs");
    tr->add_option("--seed", o.seed, "override every seed in the config");
    tr->add_option("--adv", o.adv, "override shadow augmentation: true or false");
    tr->add_option("--transform", o.transform, "override geometric augmentation: true or false");

    auto* at = app.add_subcommand("attack", "run the per-k robustness regime against a checkpoint");
    add_common(at, o);
    at->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    at->add_option("--profile", o.profile_kind, "profile kind used by the pipeline");
    at->add_option("--trials", o.trials, "trials per k");
    at->add_option("--attack-limit", o.attack_limit, "attack at most this many samples (0 = all)");
    at->add_option("--k", o.k_values, "override the k sweep");
    at->add_option("--seed", o.seed, "override every seed in the config");

    auto* bc = app.add_subcommand("boundcheck", "verify the perturbation bound on random triples");
    add_common(bc, o, false);
    bc->add_option("--triples", o.triples, "number of random (image, polygon, k) triples");
    bc->add_option("--seed", o.seed, "override the sampling seed");

    auto* sal = app.add_subcommand("saliency", "write benign and shadowed saliency maps");
    add_common(sal, o);
    sal->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    sal->add_option("--sample-id", sample_id, "dataset sample id")->required();
    sal->add_option("--profile", o.profile_kind, "profile kind used by the pipeline");

    auto* ad = app.add_subcommand("adapt", "grow a 3-channel checkpoint to 4 channels");
    ad->add_option("--input", checkpoint_path, "3-channel checkpoint")->required();
    ad->add_option("--output", checkpoint_out, "destination checkpoint")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ad->parsed()) {
            cmd_adapt(checkpoint_path, checkpoint_out);
            std::cout << "wrote " << checkpoint_out << "\n";
            return 0;
        }
        RunConfig cfg = load_with_overrides(o);
        const std::string out_dir = resolve_out_dir(cfg, o.out_dir);

        if (gen->parsed()) {
            std::string manifest = cmd_gen_data(cfg, out_dir, image_format);
            std::cout << "wrote " << manifest << "\n";
        } else if (tr->parsed()) {
            TrainOutputs out = cmd_train(cfg, out_dir);
            std::cout << "dataset " << out.source_size << " -> " << out.dataset_size
                      << " samples; benign test accuracy " << out.benign_test_accuracy << "\n"
                      << "wrote " << out.checkpoint_path << "\n"
                      << "wrote " << out.log_path << "\n";
        } else if (at->parsed()) {
            EvalReport report = cmd_attack(cfg, checkpoint_path, out_dir);
            std::cout << "defense " << report.defense_label << ", benign accuracy "
                      << report.benign_accuracy << ", " << report.attack_set_size
                      << " attacked samples\n"
                      << "wrote " << out_dir << "/report.{csv,json} and robustness.svg\n";
        } else if (bc->parsed()) {
            BoundCheckSummary sum = cmd_boundcheck(cfg, out_dir);
            std::cout << sum.triples << " triples, " << sum.violations
                      << " violations, max ratio l2 " << sum.max_ratio_l2 << ", linf "
                      << sum.max_ratio_linf << "\n"
                      << "wrote " << sum.summary_path << "\n";
        } else if (sal->parsed()) {
            SaliencyOutputs out = cmd_saliency(cfg, checkpoint_path, sample_id, out_dir);
            std::cout << "wrote " << out.benign_path << "\n"
                      << "wrote " << out.shadowed_path << "\n";
        }
    } catch (const BoundViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
