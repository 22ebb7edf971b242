#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedtrial/dataset.hpp"
#include "fedtrial/nn.hpp"
#include "fedtrial/parallel.hpp"

namespace fedtrial {

// A client is a view over rows of a shared encoded dataset.
struct ClientData {
    int center_id = 0;
    std::vector<std::size_t> rows;
};

struct ClientUpdate {
    int center_id = 0;
    nn::ModelParameters params;
    std::size_t sample_count = 0;
    double train_loss = 0.0;  // mean minibatch loss across the client's epochs
};

struct FederatedConfig {
    nn::ArchitectureSpec arch;
    int rounds = 30;
    int local_epochs = 1;
    int batch_size = 64;
    nn::OptimizerConfig optimizer;
    std::vector<int> centers;  // participating center ids; empty = all clients given.
                               // Each id must match a client; duplicates are rejected.
    std::uint64_t seed = 1;
    int min_train_size = 2;    // below this a center is untrainable in the local scenario
    Exec exec = Exec::Parallel;

    void validate() const;  // throws ConfigError
};

struct RoundMetrics {
    int round = 0;  // 1-based
    double mean_train_loss = 0.0;
    double test_auc = 0.0;
    double seconds = 0.0;
};

struct MetricsSeries {
    std::vector<RoundMetrics> rounds;
};

// E epochs of seeded-permutation minibatch training on a copy of the global
// parameters; the caller's params are untouched.
ClientUpdate local_train(const nn::ModelParameters& global, const Dataset& data,
                         const ClientData& client, int epochs, int batch_size,
                         const nn::OptimizerConfig& optimizer, std::uint64_t seed,
                         Exec grad_mode = Exec::Serial);

// Sample-count-weighted mean, summed in ascending center_id order so the
// result is independent of the updates' list order.
nn::ModelParameters fedavg_aggregate(std::span<const ClientUpdate> updates);

struct FederatedRunResult {
    nn::ModelParameters params;
    MetricsSeries series;
};

// FedAvg round loop with full participation: broadcast, train every client,
// aggregate, evaluate on the test rows. Empty clients are skipped per round.
FederatedRunResult run_federated(const FederatedConfig& config, const Dataset& data,
                                 std::span<const ClientData> clients,
                                 std::span<const std::size_t> test_rows);

// The pooled-data baseline: one synthetic client holding every training row.
FederatedRunResult run_centralized(const FederatedConfig& config, const Dataset& data,
                                   std::span<const std::size_t> train_rows,
                                   std::span<const std::size_t> test_rows);

struct LocalResult {
    int center_id = 0;
    std::size_t n_train = 0;
    bool trained = false;  // false = untrainable (below min_train_size)
    double auc = 0.0;      // valid only when trained
};

// Each center trains alone from the shared initialization and is scored on
// the global test rows.
std::vector<LocalResult> run_local_scenario(const FederatedConfig& config, const Dataset& data,
                                            std::span<const ClientData> clients,
                                            std::span<const std::size_t> test_rows);

struct SweepRow {
    int k = 0;
    std::vector<int> centers;  // ids included at this k
    double final_auc = 0.0;
    MetricsSeries series;
};

// Federated runs over the top-k clients for k = 1..C (clients must already be
// in descending-size order); every row starts from the same initialization.
std::vector<SweepRow> run_center_sweep(const FederatedConfig& config, const Dataset& data,
                                       std::span<const ClientData> clients,
                                       std::span<const std::size_t> test_rows);

}  // namespace fedtrial
