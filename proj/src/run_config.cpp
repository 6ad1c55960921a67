#include "shadowlab/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shadowlab/eval.hpp"

namespace shadowlab {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::vector<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config: bad value for '") + key + "'");
        }
    }
}

}  // namespace

std::string profile_kind_name(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::none: return "none";
        case ProfileKind::adathresh: return "adathresh";
        case ProfileKind::edges: return "edges";
    }
    return "none";
}

ProfileKind profile_kind_from_name(const std::string& name) {
    if (name == "none") return ProfileKind::none;
    if (name == "adathresh") return ProfileKind::adathresh;
    if (name == "edges") return ProfileKind::edges;
    throw ConfigError("config: unknown profile kind '" + name + "'");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, {"dataset", "profile", "augment", "model", "pso", "eval", "boundcheck",
                       "output_dir"},
                   "top level");

    RunConfig cfg;
    cfg.k_values = KSweep::full().values;

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        reject_unknown(d, {"kind", "classes", "per_class", "bg_jitter", "seed", "root", "manifest"},
                       "dataset");
        std::string kind = "synthetic";
        get_if(d, "kind", kind);
        if (kind == "synthetic") {
            cfg.dataset_kind = DatasetKind::synthetic;
            get_if(d, "classes", cfg.synthetic.class_count);
            get_if(d, "per_class", cfg.synthetic.per_class);
            get_if(d, "bg_jitter", cfg.synthetic.bg_jitter);
            get_if(d, "seed", cfg.synthetic.seed);
        } else if (kind == "manifest") {
            cfg.dataset_kind = DatasetKind::manifest;
            get_if(d, "root", cfg.dataset_root);
            get_if(d, "manifest", cfg.dataset_manifest);
            if (cfg.dataset_root.empty()) throw ConfigError("config: dataset.root is required");
        } else {
            throw ConfigError("config: dataset.kind must be synthetic or manifest");
        }
    }

    if (j.contains("profile")) {
        const json& p = j.at("profile");
        reject_unknown(p, {"kind", "window", "bias", "canny_sigma_blur", "canny_auto_sigma"},
                       "profile");
        std::string kind = profile_kind_name(cfg.profile.kind);
        get_if(p, "kind", kind);
        cfg.profile.kind = profile_kind_from_name(kind);
        get_if(p, "window", cfg.profile.window);
        get_if(p, "bias", cfg.profile.bias);
        get_if(p, "canny_sigma_blur", cfg.profile.canny_sigma_blur);
        get_if(p, "canny_auto_sigma", cfg.profile.canny_auto_sigma);
        if (cfg.profile.window < 3 || cfg.profile.window % 2 == 0)
            throw ConfigError("config: profile.window must be odd and >= 3");
    }

    if (j.contains("augment")) {
        const json& a = j.at("augment");
        reject_unknown(a, {"adv", "transform", "k_min", "k_max", "rotation_deg", "shear",
                           "translate_frac", "seed", "polygon_margin"},
                       "augment");
        get_if(a, "adv", cfg.augment.adv);
        get_if(a, "transform", cfg.augment.transform);
        get_if(a, "k_min", cfg.augment.k_min);
        get_if(a, "k_max", cfg.augment.k_max);
        get_if(a, "rotation_deg", cfg.augment.ranges.rotation_deg);
        get_if(a, "shear", cfg.augment.ranges.shear);
        get_if(a, "translate_frac", cfg.augment.ranges.translate_frac);
        get_if(a, "seed", cfg.augment.seed);
        get_if(a, "polygon_margin", cfg.augment.polygon_margin);
        if (cfg.augment.k_min <= 0.0 || cfg.augment.k_max > 1.0 ||
            cfg.augment.k_min > cfg.augment.k_max)
            throw ConfigError("config: augment k range must satisfy 0 < k_min <= k_max <= 1");
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        reject_unknown(m, {"learning_rate", "momentum", "epochs", "batch_size", "seed"}, "model");
        get_if(m, "learning_rate", cfg.hyper.learning_rate);
        get_if(m, "momentum", cfg.hyper.momentum);
        get_if(m, "epochs", cfg.hyper.epochs);
        get_if(m, "batch_size", cfg.hyper.batch_size);
        get_if(m, "seed", cfg.hyper.seed);
        if (cfg.hyper.epochs < 0) throw ConfigError("config: model.epochs must be >= 0");
        if (cfg.hyper.batch_size < 1) throw ConfigError("config: model.batch_size must be >= 1");
    }

    if (j.contains("pso")) {
        const json& p = j.at("pso");
        reject_unknown(p, {"particles", "iterations", "inertia", "cognitive", "social", "vertices",
                           "seed", "margin"},
                       "pso");
        get_if(p, "particles", cfg.pso.particles);
        get_if(p, "iterations", cfg.pso.iterations);
        get_if(p, "inertia", cfg.pso.inertia);
        get_if(p, "cognitive", cfg.pso.cognitive);
        get_if(p, "social", cfg.pso.social);
        get_if(p, "vertices", cfg.pso.vertex_count);
        get_if(p, "seed", cfg.pso.seed);
        get_if(p, "margin", cfg.pso.margin);
        if (cfg.pso.particles < 1 || cfg.pso.iterations < 1)
            throw ConfigError("config: pso.particles and pso.iterations must be >= 1");
        if (cfg.pso.vertex_count < 3) throw ConfigError("config: pso.vertices must be >= 3");
    }

    if (j.contains("eval")) {
        const json& e = j.at("eval");
        reject_unknown(e, {"k_values", "trials", "base_seed", "attack_limit"}, "eval");
        get_if(e, "k_values", cfg.k_values);
        get_if(e, "trials", cfg.trials);
        get_if(e, "base_seed", cfg.eval_seed);
        get_if(e, "attack_limit", cfg.attack_limit);
        if (cfg.trials < 1) throw ConfigError("config: eval.trials must be >= 1");
        for (double k : cfg.k_values)
            if (k <= 0.0 || k > 1.0) throw ConfigError("config: eval.k_values must lie in (0,1]");
    }

    if (j.contains("boundcheck")) {
        const json& b = j.at("boundcheck");
        reject_unknown(b, {"triples", "seed"}, "boundcheck");
        get_if(b, "triples", cfg.boundcheck_triples);
        get_if(b, "seed", cfg.boundcheck_seed);
        if (cfg.boundcheck_triples < 1) throw ConfigError("config: boundcheck.triples must be >= 1");
    }

    get_if(j, "output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_run_config(buf.str());
}

}  // namespace shadowlab
