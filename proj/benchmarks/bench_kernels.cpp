// Serial vs parallel throughput for the training kernels. Both modes share
// one reduction structure, so the comparison is about speed only; the
// equality of results is covered by tests.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "fedtrial/dataset.hpp"
#include "fedtrial/fed.hpp"
#include "fedtrial/nn.hpp"
#include "fedtrial/parallel.hpp"
#include "fedtrial/rng.hpp"

using namespace fedtrial;

namespace {

Dataset make_dense_dataset(int input_dim, std::size_t rows, std::uint64_t seed) {
    Dataset data;
    data.kind = ArchKind::FCN;
    data.feature_dim = input_dim;
    Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> row(static_cast<std::size_t>(input_dim), 0.0);
        for (double& v : row)
            v = rng.bernoulli(0.1) ? 1.0 : 0.0;
        data.dense.push_back(std::move(row));
        data.labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    return data;
}

Dataset make_sequence_dataset(int vocab, std::size_t rows, int seq_len, std::uint64_t seed) {
    Dataset data;
    data.kind = ArchKind::GRU;
    data.feature_dim = vocab;
    Rng rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<std::int32_t> seq(static_cast<std::size_t>(seq_len));
        for (auto& t : seq)
            t = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(vocab)));
        data.sequences.push_back(std::move(seq));
        data.labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
    }
    return data;
}

void BM_FcnBatchGradient(benchmark::State& state) {
    const Exec mode = state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
    nn::ArchitectureSpec spec{ArchKind::FCN, 256, {64}, 0, 7};
    const Dataset data = make_dense_dataset(spec.input_dim, 512, 11);
    const auto params = nn::init_parameters(spec);
    std::vector<std::size_t> batch(data.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    std::vector<double> grad(params.values.size());
    nn::GradWorkspace ws;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::compute_gradients(params, data, batch, grad, mode, &ws));
    }
}

void BM_GruBatchGradient(benchmark::State& state) {
    const Exec mode = state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
    nn::ArchitectureSpec spec{ArchKind::GRU, 256, {64}, 32, 7};
    const Dataset data = make_sequence_dataset(spec.input_dim, 128, 24, 13);
    const auto params = nn::init_parameters(spec);
    std::vector<std::size_t> batch(data.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    std::vector<double> grad(params.values.size());
    nn::GradWorkspace ws;
    for (auto _ : state) {
        benchmark::DoNotOptimize(nn::compute_gradients(params, data, batch, grad, mode, &ws));
    }
}

void BM_FederatedRound(benchmark::State& state) {
    const Exec mode = state.range(0) == 0 ? Exec::Serial : Exec::Parallel;
    const Dataset data = make_dense_dataset(128, 512, 17);
    std::vector<ClientData> clients(8);
    for (std::size_t c = 0; c < clients.size(); ++c) {
        clients[c].center_id = static_cast<int>(c + 1);
        for (std::size_t i = c * 56; i < (c + 1) * 56; ++i)
            clients[c].rows.push_back(i);
    }
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 448; i < data.size(); ++i)
        test_rows.push_back(i);
    FederatedConfig config;
    config.arch = {ArchKind::FCN, 128, {32}, 0, 7};
    config.rounds = 1;
    config.batch_size = 32;
    config.seed = 21;
    config.exec = mode;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_federated(config, data, clients, test_rows));
    }
}

}  // namespace

BENCHMARK(BM_FcnBatchGradient)->Arg(0)->Arg(1)->ArgNames({"parallel"});
BENCHMARK(BM_GruBatchGradient)->Arg(0)->Arg(1)->ArgNames({"parallel"});
BENCHMARK(BM_FederatedRound)->Arg(0)->Arg(1)->ArgNames({"parallel"});

BENCHMARK_MAIN();
