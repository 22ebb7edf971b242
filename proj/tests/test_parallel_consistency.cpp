#include <doctest.h>

#include "fedtrial/cohort.hpp"
#include "fedtrial/fed.hpp"
#include "fedtrial/nn.hpp"
#include "fedtrial/parallel.hpp"
#include "fedtrial/rng.hpp"

#include <numeric>
#include <vector>

using namespace fedtrial;

namespace {

Dataset random_dataset(ArchKind kind, int feature_dim, std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.kind = kind;
    d.feature_dim = feature_dim;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        if (kind == ArchKind::FCN) {
            std::vector<double> row(static_cast<std::size_t>(feature_dim));
            for (auto& v : row) v = rng.unit();
            d.dense.push_back(std::move(row));
        } else {
            std::vector<std::int32_t> seq(static_cast<std::size_t>(rng.uniform_int(1, 12)));
            for (auto& t : seq)
                t = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(feature_dim)));
            d.sequences.push_back(std::move(seq));
        }
        d.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    return d;
}

nn::ArchitectureSpec spec_for(ArchKind kind, int feature_dim) {
    nn::ArchitectureSpec s;
    s.kind = kind;
    s.input_dim = feature_dim;
    s.hidden_dims = {6};
    if (kind == ArchKind::GRU) s.embedding_dim = 3;
    s.seed = 3;
    return s;
}

} // namespace

TEST_CASE("parallel_for covers every index exactly once") {
    for (Exec mode : {Exec::Serial, Exec::Parallel}) {
        std::vector<int> hits(501, 0);
        parallel_for(hits.size(), mode, [&](std::size_t i) { ++hits[i]; });
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("parallel_for propagates exceptions from workers") {
    CHECK_THROWS_AS(parallel_for(64, Exec::Parallel,
                                 [&](std::size_t i) {
                                     if (i == 13) throw DataError("boom");
                                 }),
                    DataError);
}

TEST_CASE("batch gradients are bit-identical across exec modes and thread caps") {
    for (ArchKind kind : {ArchKind::FCN, ArchKind::GRU}) {
        const int dim = 9;
        const auto spec = spec_for(kind, dim);
        const auto params = nn::init_parameters(spec);
        for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{64}, std::size_t{150}}) {
            const auto d = random_dataset(kind, dim, n, 50 + n);
            std::vector<std::size_t> batch(n);
            std::iota(batch.begin(), batch.end(), std::size_t{0});
            std::vector<double> serial(params.values.size()), parallel(params.values.size());
            const double ls = nn::compute_gradients(params, d, batch, serial, Exec::Serial);

            set_max_threads(4);
            const double lp4 = nn::compute_gradients(params, d, batch, parallel, Exec::Parallel);
            CHECK(ls == lp4);
            CHECK(serial == parallel);

            set_max_threads(1);
            const double lp1 = nn::compute_gradients(params, d, batch, parallel, Exec::Parallel);
            CHECK(ls == lp1);
            CHECK(serial == parallel);
            set_max_threads(0);
        }
    }
}

TEST_CASE("federated runs are bit-identical across exec modes") {
    const int dim = 8;
    const auto d = random_dataset(ArchKind::FCN, dim, 60, 99);
    FederatedConfig cfg;
    cfg.arch = spec_for(ArchKind::FCN, dim);
    cfg.rounds = 3;
    cfg.batch_size = 8;
    cfg.optimizer.learning_rate = 5e-3;
    cfg.seed = 2;
    std::vector<std::size_t> r0(20), r1(15), r2(10), test(15);
    std::iota(r0.begin(), r0.end(), std::size_t{0});
    std::iota(r1.begin(), r1.end(), std::size_t{20});
    std::iota(r2.begin(), r2.end(), std::size_t{35});
    std::iota(test.begin(), test.end(), std::size_t{45});
    const std::vector<ClientData> clients = {{1, r0}, {2, r1}, {3, r2}};

    cfg.exec = Exec::Serial;
    const auto serial = run_federated(cfg, d, clients, test);
    cfg.exec = Exec::Parallel;
    set_max_threads(4);
    const auto parallel = run_federated(cfg, d, clients, test);
    set_max_threads(0);

    CHECK(serial.params.values == parallel.params.values);
    REQUIRE(serial.series.rounds.size() == parallel.series.rounds.size());
    for (std::size_t i = 0; i < serial.series.rounds.size(); ++i) {
        CHECK(serial.series.rounds[i].mean_train_loss ==
              parallel.series.rounds[i].mean_train_loss);
        CHECK(serial.series.rounds[i].test_auc == parallel.series.rounds[i].test_auc);
    }
}

TEST_CASE("cohort generation is identical across thread caps") {
    GeneratorConfig cfg;
    cfg.n_patients = 400;
    cfg.n_centers = 5;
    cfg.seed = 7;
    set_max_threads(1);
    const auto one = generate_cohort(cfg);
    set_max_threads(4);
    const auto four = generate_cohort(cfg);
    set_max_threads(0);
    CHECK(cohort_to_jsonl(one) == cohort_to_jsonl(four));
}
