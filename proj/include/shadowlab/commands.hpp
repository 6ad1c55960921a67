#pragma once

#include <string>

#include "shadowlab/eval.hpp"
#include "shadowlab/run_config.hpp"

namespace shadowlab {

// Command implementations behind the CLI; every command is deterministic
// given the config seeds and writes only under out_dir.

struct TrainOutputs {
    std::string checkpoint_path;
    std::string log_path;
    double benign_test_accuracy = 0.0;
    std::size_t source_size = 0;
    std::size_t dataset_size = 0;  // after expansion
};

struct BoundCheckSummary {
    long triples = 0;
    long violations = 0;
    double max_ratio_l2 = 0.0;
    double max_ratio_linf = 0.0;
    std::string summary_path;
};

TrainOutputs cmd_train(const RunConfig& cfg, const std::string& out_dir);

// Writes report.csv, report.json and robustness.svg; returns the report.
EvalReport cmd_attack(const RunConfig& cfg, const std::string& checkpoint_path,
                      const std::string& out_dir);

// Throws BoundViolation (exit code 2) on the first violating triple.
BoundCheckSummary cmd_boundcheck(const RunConfig& cfg, const std::string& out_dir);

struct SaliencyOutputs {
    std::string benign_path;
    std::string shadowed_path;
};

SaliencyOutputs cmd_saliency(const RunConfig& cfg, const std::string& checkpoint_path,
                             const std::string& sample_id, const std::string& out_dir);

std::string cmd_gen_data(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& image_format);

void cmd_adapt(const std::string& checkpoint_in, const std::string& checkpoint_out);

DatasetSplit load_configured_dataset(const RunConfig& cfg);

}  // namespace shadowlab
