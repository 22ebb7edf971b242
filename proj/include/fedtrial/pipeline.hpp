#pragma once

#include <string>
#include <vector>

#include "fedtrial/config.hpp"
#include "fedtrial/dataset.hpp"
#include "fedtrial/encoding.hpp"
#include "fedtrial/fed.hpp"

namespace fedtrial {

enum class Scenario { Local, Central, Federated, Sweep };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

// Labeled patients only, encoded once; scenario runners index into this.
struct EncodedExperiment {
    Vocabulary vocab;
    Dataset data;
    std::vector<std::string> patient_ids;  // per dataset row
    std::vector<int> center_ids;           // per dataset row
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::vector<ClientData> clients;       // training rows per center, descending size
    bool vocab_built = false;              // true when built here rather than loaded
};

// Reads cohort/labels/split from config.paths, drops excluded patients,
// builds or loads the vocabulary (training fold only), encodes for the
// configured architecture.
EncodedExperiment prepare_experiment(const RunConfig& config);

// Command bodies shared by the CLI and tests. Each writes its artifacts plus
// a manifest under config.paths.out and returns a JSON summary string.
std::string run_generate(const RunConfig& config);
std::string run_split(const RunConfig& config);
std::string run_scenario(const RunConfig& config, Scenario scenario,
                         const std::vector<int>& centers_override = {});
std::string run_gradient_check(std::uint64_t seed);

// Small random architecture plus a matching random dataset, for gradient
// verification; deterministic in the seed.
std::pair<nn::ArchitectureSpec, Dataset> random_check_instance(ArchKind kind, std::uint64_t seed);

}  // namespace fedtrial
