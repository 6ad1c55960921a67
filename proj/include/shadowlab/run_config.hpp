#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shadowlab/augment.hpp"
#include "shadowlab/data.hpp"
#include "shadowlab/model.hpp"
#include "shadowlab/shadow.hpp"

namespace shadowlab {

// Invalid configuration / inputs: exit code 1 at the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A normative assertion (the perturbation bound) failed: exit code 2.
struct BoundViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DatasetKind { synthetic, manifest };

struct RunConfig {
    DatasetKind dataset_kind = DatasetKind::synthetic;
    SyntheticSpec synthetic;
    std::string dataset_root;
    std::string dataset_manifest = "manifest.csv";

    ProfileConfig profile;  // kind: none | adathresh | edges
    AugmentConfig augment;  // profile member is filled from `profile` at use time
    TrainHyper hyper;
    PsoConfig pso;

    std::vector<double> k_values;  // defaults to the full sweep
    int trials = 3;
    std::uint64_t eval_seed = 101;
    int attack_limit = 0;  // 0 = attack every benignly-correct sample

    long boundcheck_triples = 1000;
    std::uint64_t boundcheck_seed = 99;

    std::string output_dir = "out";
};

// Strict parser: unknown keys anywhere are rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

std::string profile_kind_name(ProfileKind kind);
ProfileKind profile_kind_from_name(const std::string& name);

}  // namespace shadowlab
