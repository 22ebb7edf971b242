#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedtrial/cohort.hpp"
#include "fedtrial/fed.hpp"

namespace fedtrial {

struct ModelConfig {
    ArchKind arch = ArchKind::FCN;
    std::vector<int> hidden_dims = {64};
    int embedding_dim = 32;   // GRU only
    int max_seq_len = 256;    // GRU only
    int min_count = 1;        // vocabulary threshold
};

struct TrainingConfig {
    int rounds = 30;
    int local_epochs = 1;
    int batch_size = 64;
    nn::OptimizerConfig optimizer;
    int min_train_size = 2;
};

struct SplitConfig {
    double test_fraction = 0.2;
};

struct PathsConfig {
    std::string cohort = "cohort.jsonl";
    std::string labels = "labels.jsonl";
    std::string split = "split.jsonl";
    std::string vocab;  // empty = build from the training fold and write it
    std::string out = "out";
};

// The on-disk config document: nested sections, unknown keys rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    GeneratorConfig generator;
    ModelConfig model;
    TrainingConfig training;
    SplitConfig split;
    PathsConfig paths;
};

RunConfig load_run_config(const std::string& path);           // throws ConfigError
RunConfig parse_run_config(const std::string& json_text);     // throws ConfigError
std::string dump_run_config(const RunConfig& config);         // full echo, round-trips losslessly

}  // namespace fedtrial
