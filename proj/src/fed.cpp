#include "fedtrial/fed.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "fedtrial/errors.hpp"
#include "fedtrial/eval.hpp"
#include "fedtrial/log.hpp"
#include "fedtrial/rng.hpp"

namespace fedtrial {

void FederatedConfig::validate() const {
    arch.validate();
    if (rounds < 1)
        throw ConfigError("federated: rounds must be >= 1");
    if (local_epochs < 1)
        throw ConfigError("federated: local_epochs must be >= 1");
    if (batch_size < 1)
        throw ConfigError("federated: batch_size must be >= 1");
    if (min_train_size < 1)
        throw ConfigError("federated: min_train_size must be >= 1");
    nn::OptimizerState::make(optimizer, 0);  // validates the optimizer settings
}

ClientUpdate local_train(const nn::ModelParameters& global, const Dataset& data,
                         const ClientData& client, int epochs, int batch_size,
                         const nn::OptimizerConfig& optimizer, std::uint64_t seed, Exec grad_mode) {
    if (client.rows.empty())
        throw DataError("local_train: client " + std::to_string(client.center_id) + " has no data");
    if (epochs < 1 || batch_size < 1)
        throw ConfigError("local_train: epochs and batch_size must be >= 1");

    ClientUpdate update;
    update.center_id = client.center_id;
    update.params = global;
    update.sample_count = client.rows.size();

    auto state = nn::OptimizerState::make(optimizer, update.params.values.size());
    std::vector<std::size_t> perm = client.rows;
    std::vector<double> grad(update.params.values.size());
    nn::GradWorkspace ws;
    Rng rng(seed);

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    const auto bs = static_cast<std::size_t>(batch_size);
    for (int e = 0; e < epochs; ++e) {
        rng.shuffle(perm);
        for (std::size_t start = 0; start < perm.size(); start += bs) {
            const std::size_t len = std::min(bs, perm.size() - start);
            const std::span<const std::size_t> batch(perm.data() + start, len);
            loss_sum += nn::compute_gradients(update.params, data, batch, grad, grad_mode, &ws);
            nn::optimizer_step(update.params, grad, state);
            ++n_batches;
        }
    }
    update.train_loss = loss_sum / static_cast<double>(n_batches);
    return update;
}

nn::ModelParameters fedavg_aggregate(std::span<const ClientUpdate> updates) {
    if (updates.empty())
        throw AggregationError("fedavg_aggregate: no updates");
    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return updates[a].center_id < updates[b].center_id;
    });

    // Same structure is required; the init seed is provenance and may differ.
    const auto same_arch = [](const nn::ArchitectureSpec& a, const nn::ArchitectureSpec& b) {
        return a.kind == b.kind && a.input_dim == b.input_dim && a.hidden_dims == b.hidden_dims &&
               a.embedding_dim == b.embedding_dim;
    };

    const ClientUpdate& ref = updates[order[0]];
    unsigned long long total = 0;
    for (const ClientUpdate& u : updates) {
        if (u.sample_count == 0)
            throw AggregationError("fedavg_aggregate: client " + std::to_string(u.center_id) +
                                   " reports zero samples");
        if (!same_arch(u.params.spec, ref.params.spec))
            throw AggregationError("fedavg_aggregate: mixed architecture specs");
        if (u.params.values.size() != ref.params.values.size())
            throw AggregationError("fedavg_aggregate: parameter length mismatch");
        total += u.sample_count;
    }
    for (std::size_t i = 1; i < order.size(); ++i)
        if (updates[order[i]].center_id == updates[order[i - 1]].center_id)
            throw AggregationError("fedavg_aggregate: duplicate center " +
                                   std::to_string(updates[order[i]].center_id));
    if (updates.size() == 1)
        return ref.params;

    // Anchored mean: out = ref + sum_k w_k (v_k - ref) over ascending
    // center_id with w_k = n_k / n. The ref term is exactly zero and skipped,
    // which makes the all-identical case return ref verbatim, and the
    // normalized weights make uniform scaling of the counts a no-op.
    nn::ModelParameters out = ref.params;
    const auto denom = static_cast<double>(total);
    for (std::size_t k : order) {
        if (&updates[k] == &ref)
            continue;
        const double w = static_cast<double>(updates[k].sample_count) / denom;
        const auto& v = updates[k].params.values;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += w * (v[i] - ref.params.values[i]);
    }
    return out;
}

namespace {

double score_row(const nn::ModelParameters& params, const Dataset& data, std::size_t row) {
    return data.kind == ArchKind::FCN ? nn::fcn_forward(params, data.dense[row])
                                      : nn::gru_forward(params, data.sequences[row]);
}

double evaluate_auc(const nn::ModelParameters& params, const Dataset& data,
                    std::span<const std::size_t> rows, Exec mode) {
    if (rows.empty())
        throw DataError("evaluate: no test rows");
    ScoredSet scored;
    scored.scores.resize(rows.size());
    scored.labels.resize(rows.size());
    parallel_for(rows.size(), mode, [&](std::size_t i) {
        scored.scores[i] = score_row(params, data, rows[i]);
        scored.labels[i] = data.labels[rows[i]];
    });
    return roc_auc(scored);
}

}  // namespace

FederatedRunResult run_federated(const FederatedConfig& config, const Dataset& data,
                                 std::span<const ClientData> clients,
                                 std::span<const std::size_t> test_rows) {
    config.validate();
    data.check_consistent();

    // A selection that names a center we do not have is a caller mistake, not
    // a smaller experiment; fail before training starts.
    if (!config.centers.empty()) {
        std::vector<int> wanted = config.centers;
        std::sort(wanted.begin(), wanted.end());
        for (std::size_t i = 1; i < wanted.size(); ++i)
            if (wanted[i] == wanted[i - 1])
                throw ConfigError("run_federated: duplicate center id " +
                                  std::to_string(wanted[i]) + " in selection");
        for (int id : wanted)
            if (std::none_of(clients.begin(), clients.end(),
                             [id](const ClientData& c) { return c.center_id == id; }))
                throw ConfigError("run_federated: unknown center id " + std::to_string(id) +
                                  " in selection");
    }

    std::vector<const ClientData*> active;
    for (const ClientData& c : clients) {
        if (!config.centers.empty() &&
            std::find(config.centers.begin(), config.centers.end(), c.center_id) ==
                config.centers.end())
            continue;
        if (c.rows.empty()) {
            log::info("round setup: skipping empty center " + std::to_string(c.center_id));
            continue;
        }
        active.push_back(&c);
    }
    if (active.empty())
        throw DataError("run_federated: every client was skipped");

    // One level of parallelism: across clients when there are several,
    // otherwise inside the single client's batch gradients.
    const Exec client_mode = active.size() > 1 ? config.exec : Exec::Serial;
    const Exec grad_mode = active.size() > 1 ? Exec::Serial : config.exec;

    FederatedRunResult result;
    result.params = nn::init_parameters(config.arch);
    for (int round = 1; round <= config.rounds; ++round) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<ClientUpdate> updates(active.size());
        parallel_for(active.size(), client_mode, [&](std::size_t a) {
            const std::uint64_t client_seed =
                derive_seed({config.seed, seed_tag::kRound, static_cast<std::uint64_t>(round),
                             static_cast<std::uint64_t>(active[a]->center_id)});
            updates[a] = local_train(result.params, data, *active[a], config.local_epochs,
                                     config.batch_size, config.optimizer, client_seed, grad_mode);
        });
        result.params = fedavg_aggregate(updates);

        double loss_sum = 0.0;
        for (const ClientUpdate& u : updates)
            loss_sum += u.train_loss;
        RoundMetrics metrics;
        metrics.round = round;
        metrics.mean_train_loss = loss_sum / static_cast<double>(updates.size());
        metrics.test_auc = evaluate_auc(result.params, data, test_rows, config.exec);
        metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.series.rounds.push_back(metrics);
        log::debug("round " + std::to_string(round) + " auc " + std::to_string(metrics.test_auc));
    }
    return result;
}

FederatedRunResult run_centralized(const FederatedConfig& config, const Dataset& data,
                                   std::span<const std::size_t> train_rows,
                                   std::span<const std::size_t> test_rows) {
    ClientData pooled;
    pooled.center_id = 0;
    pooled.rows.assign(train_rows.begin(), train_rows.end());
    FederatedConfig cfg = config;
    cfg.centers.clear();
    return run_federated(cfg, data, std::span<const ClientData>(&pooled, 1), test_rows);
}

std::vector<LocalResult> run_local_scenario(const FederatedConfig& config, const Dataset& data,
                                            std::span<const ClientData> clients,
                                            std::span<const std::size_t> test_rows) {
    FederatedConfig cfg = config;
    cfg.centers.clear();
    std::vector<LocalResult> results;
    results.reserve(clients.size());
    for (const ClientData& client : clients) {
        LocalResult r;
        r.center_id = client.center_id;
        r.n_train = client.rows.size();
        if (client.rows.size() < static_cast<std::size_t>(config.min_train_size)) {
            log::info("local scenario: center " + std::to_string(client.center_id) +
                     " untrainable with " + std::to_string(client.rows.size()) + " rows");
        } else {
            const auto run = run_federated(cfg, data, std::span<const ClientData>(&client, 1),
                                           test_rows);
            r.trained = true;
            r.auc = run.series.rounds.back().test_auc;
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<SweepRow> run_center_sweep(const FederatedConfig& config, const Dataset& data,
                                       std::span<const ClientData> clients,
                                       std::span<const std::size_t> test_rows) {
    if (clients.empty())
        throw DataError("run_center_sweep: no clients");
    FederatedConfig cfg = config;
    cfg.centers.clear();
    std::vector<SweepRow> rows;
    rows.reserve(clients.size());
    for (std::size_t k = 1; k <= clients.size(); ++k) {
        SweepRow row;
        row.k = static_cast<int>(k);
        for (std::size_t i = 0; i < k; ++i)
            row.centers.push_back(clients[i].center_id);
        auto run = run_federated(cfg, data, clients.subspan(0, k), test_rows);
        row.final_auc = run.series.rounds.back().test_auc;
        row.series = std::move(run.series);
        log::info("sweep k=" + std::to_string(k) + " auc " + std::to_string(row.final_auc));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace fedtrial
