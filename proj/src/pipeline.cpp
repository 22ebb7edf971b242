#include "fedtrial/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "fedtrial/artifacts.hpp"
#include "fedtrial/errors.hpp"
#include "fedtrial/io.hpp"
#include "fedtrial/log.hpp"
#include "fedtrial/rng.hpp"

namespace fedtrial {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Scenario scenario) {
    switch (scenario) {
    case Scenario::Local: return "local";
    case Scenario::Central: return "central";
    case Scenario::Federated: return "federated";
    case Scenario::Sweep: return "sweep";
    }
    throw ConfigError("unknown scenario value");
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "local") return Scenario::Local;
    if (name == "central") return Scenario::Central;
    if (name == "federated") return Scenario::Federated;
    if (name == "sweep") return Scenario::Sweep;
    throw ConfigError("unknown scenario '" + name + "' (expected local|central|federated|sweep)");
}

namespace {

std::string require_input(const std::string& path, const char* what) {
    if (path.empty() || !fs::exists(path))
        throw ConfigError(std::string(what) + " file not found: " + path);
    return io::read_file(path);
}

void write_artifact(const fs::path& path, const std::string& content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    io::write_file(path, content);
}

nn::ArchitectureSpec make_arch_spec(const RunConfig& config, int vocab_size) {
    nn::ArchitectureSpec spec;
    spec.kind = config.model.arch;
    spec.input_dim = vocab_size;
    spec.hidden_dims = config.model.hidden_dims;
    spec.embedding_dim = config.model.arch == ArchKind::GRU ? config.model.embedding_dim : 0;
    spec.seed = config.seed;
    return spec;
}

FederatedConfig make_fed_config(const RunConfig& config, int vocab_size,
                                const std::vector<int>& centers) {
    FederatedConfig fc;
    fc.arch = make_arch_spec(config, vocab_size);
    fc.rounds = config.training.rounds;
    fc.local_epochs = config.training.local_epochs;
    fc.batch_size = config.training.batch_size;
    fc.optimizer = config.training.optimizer;
    fc.centers = centers;
    fc.seed = config.seed;
    fc.min_train_size = config.training.min_train_size;
    return fc;
}

}  // namespace

EncodedExperiment prepare_experiment(const RunConfig& config) {
    const auto records = cohort_from_jsonl(require_input(config.paths.cohort, "cohort"));
    const auto label_rows = labels_from_jsonl(require_input(config.paths.labels, "labels"));
    const auto split = split_from_jsonl(require_input(config.paths.split, "split"));

    std::map<std::string, const LabelOutcome*> outcome_of;
    for (const auto& [id, outcome] : label_rows)
        if (!outcome_of.emplace(id, &outcome).second)
            throw DataError("labels file: duplicate patient_id '" + id + "'");

    std::map<std::string, bool> is_test;
    for (const auto& id : split.train_ids)
        is_test.emplace(id, false);
    for (const auto& id : split.test_ids)
        if (!is_test.emplace(id, true).second)
            throw DataError("split file: patient '" + id + "' appears in both folds");

    // Labeled patients in cohort-file order; excluded patients drop out here.
    EncodedExperiment exp;
    std::vector<const PatientRecord*> labeled;
    std::vector<int> index_days;
    for (const PatientRecord& r : records) {
        const auto it = outcome_of.find(r.patient_id);
        if (it == outcome_of.end())
            throw DataError("labels file: no entry for patient '" + r.patient_id + "'");
        const LabelOutcome& o = *it->second;
        if (o.label == Label::Excluded)
            continue;
        labeled.push_back(&r);
        index_days.push_back(o.index_day.value());
        exp.patient_ids.push_back(r.patient_id);
        exp.center_ids.push_back(r.center_id);
        exp.data.labels.push_back(o.label == Label::TF ? 1 : 0);
    }
    if (labeled.empty())
        throw DataError("no labeled patients to train on");

    for (std::size_t row = 0; row < labeled.size(); ++row) {
        const auto it = is_test.find(exp.patient_ids[row]);
        if (it == is_test.end())
            throw DataError("split file: no fold for patient '" + exp.patient_ids[row] + "'");
        (it->second ? exp.test_rows : exp.train_rows).push_back(row);
    }

    if (!config.paths.vocab.empty()) {
        exp.vocab = Vocabulary::from_jsonl(require_input(config.paths.vocab, "vocabulary"));
    } else {
        std::vector<PatientRecord> train_records;
        std::vector<int> train_index_days;
        for (std::size_t row : exp.train_rows) {
            train_records.push_back(*labeled[row]);
            train_index_days.push_back(index_days[row]);
        }
        exp.vocab = build_vocabulary(train_records, train_index_days, config.model.min_count);
        exp.vocab_built = true;
    }

    exp.data.kind = config.model.arch;
    exp.data.feature_dim = static_cast<int>(exp.vocab.size());
    if (config.model.arch == ArchKind::FCN) {
        exp.data.dense.resize(labeled.size());
        parallel_for(labeled.size(), Exec::Parallel, [&](std::size_t row) {
            exp.data.dense[row] = encode_multi_hot(*labeled[row], index_days[row], exp.vocab);
        });
    } else {
        exp.data.sequences.resize(labeled.size());
        parallel_for(labeled.size(), Exec::Parallel, [&](std::size_t row) {
            exp.data.sequences[row] =
                encode_sequence(*labeled[row], index_days[row], exp.vocab, config.model.max_seq_len);
        });
    }
    exp.data.check_consistent();

    // Training rows per center in descending-size order (ties by id), which
    // is also the sweep enumeration order.
    std::map<int, std::vector<std::size_t>> center_rows;
    for (std::size_t row : exp.train_rows)
        center_rows[exp.center_ids[row]].push_back(row);
    for (auto& [center, rows] : center_rows)
        exp.clients.push_back({center, std::move(rows)});
    std::sort(exp.clients.begin(), exp.clients.end(), [](const ClientData& a, const ClientData& b) {
        if (a.rows.size() != b.rows.size())
            return a.rows.size() > b.rows.size();
        return a.center_id < b.center_id;
    });
    return exp;
}

std::string run_generate(const RunConfig& config) {
    const auto records = generate_cohort(config.generator);
    std::vector<LabelOutcome> outcomes(records.size());
    parallel_for(records.size(), Exec::Parallel, [&](std::size_t i) {
        outcomes[i] = annotate(records[i], default_tf_codes(), default_clopidogrel_codes());
    });

    write_artifact(config.paths.cohort, cohort_to_jsonl(records));
    write_artifact(config.paths.labels, labels_to_jsonl(records, outcomes));

    fs::create_directories(config.paths.out);
    const std::string manifest =
        make_manifest("generate", config, {}, {config.paths.cohort, config.paths.labels});
    write_artifact(fs::path(config.paths.out) / "manifest_generate.json", manifest);

    std::map<std::string, int> label_counts;
    std::map<std::string, int> reason_counts;
    std::map<int, std::map<std::string, int>> center_counts;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string label = to_string(outcomes[i].label);
        ++label_counts[label];
        ++center_counts[records[i].center_id][label];
        if (outcomes[i].label == Label::Excluded)
            ++reason_counts[to_string(outcomes[i].reason)];
    }
    json centers = json::array();
    for (const auto& [center, counts] : center_counts) {
        json entry{{"center_id", center}};
        int total = 0;
        for (const auto& [label, n] : counts) {
            entry[label] = n;
            total += n;
        }
        entry["total"] = total;
        centers.push_back(std::move(entry));
    }
    const json summary{{"total", records.size()},
                       {"labels", label_counts},
                       {"excluded_reasons", reason_counts},
                       {"centers", std::move(centers)}};
    return summary.dump(2) + "\n";
}

std::string run_split(const RunConfig& config) {
    const std::string cohort_text = require_input(config.paths.cohort, "cohort");
    const std::string labels_text = require_input(config.paths.labels, "labels");
    const auto records = cohort_from_jsonl(cohort_text);
    const auto label_rows = labels_from_jsonl(labels_text);

    std::map<std::string, const LabelOutcome*> outcome_of;
    for (const auto& [id, outcome] : label_rows)
        outcome_of.emplace(id, &outcome);

    std::vector<PatientRecord> labeled;
    std::vector<LabelOutcome> outcomes;
    for (const PatientRecord& r : records) {
        const auto it = outcome_of.find(r.patient_id);
        if (it == outcome_of.end())
            throw DataError("labels file: no entry for patient '" + r.patient_id + "'");
        if (it->second->label == Label::Excluded)
            continue;
        labeled.push_back(r);
        outcomes.push_back(*it->second);
    }

    const SplitResult split =
        stratified_split(labeled, outcomes, config.split.test_fraction, config.seed);
    write_artifact(config.paths.split, split_to_jsonl(split));

    fs::create_directories(config.paths.out);
    const std::map<std::string, std::string> inputs{
        {config.paths.cohort, io::git_blob_sha1(cohort_text)},
        {config.paths.labels, io::git_blob_sha1(labels_text)}};
    write_artifact(fs::path(config.paths.out) / "manifest_split.json",
                   make_manifest("split", config, inputs, {config.paths.split}));

    std::set<std::string> test_ids(split.test_ids.begin(), split.test_ids.end());
    std::map<int, std::map<std::string, int>> center_counts;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        const std::string fold = test_ids.count(labeled[i].patient_id) ? "test" : "train";
        const std::string label = to_string(outcomes[i].label);
        ++center_counts[labeled[i].center_id][fold + "_" + label];
    }
    json centers = json::array();
    for (const auto& [center, counts] : center_counts) {
        json entry{{"center_id", center}};
        for (const auto& [key, n] : counts)
            entry[key] = n;
        centers.push_back(std::move(entry));
    }
    const json summary{{"labeled", labeled.size()},
                       {"train", split.train_ids.size()},
                       {"test", split.test_ids.size()},
                       {"centers", std::move(centers)}};
    return summary.dump(2) + "\n";
}

std::string run_scenario(const RunConfig& config, Scenario scenario,
                         const std::vector<int>& centers_override) {
    const EncodedExperiment exp = prepare_experiment(config);
    const FederatedConfig fc = make_fed_config(config, static_cast<int>(exp.vocab.size()),
                                               scenario == Scenario::Federated ? centers_override
                                                                               : std::vector<int>{});
    const fs::path out_dir(config.paths.out);
    fs::create_directories(out_dir);

    std::map<std::string, std::string> inputs{
        {config.paths.cohort, io::git_blob_sha1_file(config.paths.cohort)},
        {config.paths.labels, io::git_blob_sha1_file(config.paths.labels)},
        {config.paths.split, io::git_blob_sha1_file(config.paths.split)}};
    if (!config.paths.vocab.empty())
        inputs.emplace(config.paths.vocab, io::git_blob_sha1_file(config.paths.vocab));

    std::vector<std::string> outputs;
    auto emit = [&](const std::string& name, const std::string& content) {
        write_artifact(out_dir / name, content);
        outputs.push_back(name);
    };
    if (exp.vocab_built)
        emit("vocab.jsonl", exp.vocab.to_jsonl());

    const std::string tag = to_string(scenario);
    json summary{{"scenario", tag},
                 {"arch", config.model.arch == ArchKind::FCN ? "fcn" : "gru"},
                 {"n_train", exp.train_rows.size()},
                 {"n_test", exp.test_rows.size()},
                 {"vocab_size", exp.vocab.size()}};

    switch (scenario) {
    case Scenario::Central: {
        const auto run = run_centralized(fc, exp.data, exp.train_rows, exp.test_rows);
        emit(tag + "_metrics.csv", metrics_to_csv(run.series));
        emit(tag + "_timings.csv", timings_to_csv(run.series));
        emit(tag + "_params.bin", nn::serialize_parameters(run.params));
        summary["final_auc"] = run.series.rounds.back().test_auc;
        break;
    }
    case Scenario::Federated: {
        const auto run = run_federated(fc, exp.data, exp.clients, exp.test_rows);
        emit(tag + "_metrics.csv", metrics_to_csv(run.series));
        emit(tag + "_timings.csv", timings_to_csv(run.series));
        emit(tag + "_params.bin", nn::serialize_parameters(run.params));
        summary["final_auc"] = run.series.rounds.back().test_auc;
        if (!centers_override.empty())
            summary["centers"] = centers_override;
        break;
    }
    case Scenario::Local: {
        const auto results = run_local_scenario(fc, exp.data, exp.clients, exp.test_rows);
        emit("local_results.csv", local_results_to_csv(results));
        json rows = json::array();
        double auc_sum = 0.0;
        int trained = 0;
        for (const LocalResult& r : results) {
            json row{{"center_id", r.center_id},
                     {"n_train", r.n_train},
                     {"status", r.trained ? "TRAINED" : "UNTRAINABLE"}};
            if (r.trained) {
                row["final_auc"] = r.auc;
                auc_sum += r.auc;
                ++trained;
            }
            rows.push_back(std::move(row));
        }
        summary["results"] = std::move(rows);
        if (trained > 0)
            summary["mean_trained_auc"] = auc_sum / trained;
        break;
    }
    case Scenario::Sweep: {
        const auto rows = run_center_sweep(fc, exp.data, exp.clients, exp.test_rows);
        std::vector<std::string> metric_paths;
        for (const SweepRow& row : rows) {
            char name[48];
            std::snprintf(name, sizeof(name), "sweep_k%02d_metrics.csv", row.k);
            emit(name, metrics_to_csv(row.series));
            metric_paths.emplace_back(name);
        }
        emit("sweep.csv", sweep_to_csv(rows, metric_paths));
        double best = 0.0;
        for (const SweepRow& row : rows)
            best = std::max(best, row.final_auc);
        summary["rows"] = rows.size();
        summary["best_auc"] = best;
        break;
    }
    }

    write_artifact(out_dir / ("manifest_" + tag + ".json"),
                   make_manifest("run " + tag, config, inputs, outputs));
    return summary.dump(2) + "\n";
}

std::pair<nn::ArchitectureSpec, Dataset> random_check_instance(ArchKind kind, std::uint64_t seed) {
    Rng rng(seed);
    nn::ArchitectureSpec spec;
    spec.kind = kind;
    spec.seed = rng.next_u64();
    Dataset data;
    data.kind = kind;
    const int n = rng.uniform_int(2, 8);
    if (kind == ArchKind::FCN) {
        spec.input_dim = rng.uniform_int(2, 10);
        const int layers = rng.uniform_int(1, 2);
        for (int l = 0; l < layers; ++l)
            spec.hidden_dims.push_back(rng.uniform_int(2, 6));
        data.feature_dim = spec.input_dim;
        for (int i = 0; i < n; ++i) {
            std::vector<double> row(static_cast<std::size_t>(spec.input_dim));
            for (double& v : row)
                v = rng.bernoulli(0.5) ? 1.0 : rng.uniform(-0.5, 0.5);
            data.dense.push_back(std::move(row));
            data.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
    } else {
        spec.input_dim = rng.uniform_int(5, 12);
        spec.hidden_dims.push_back(rng.uniform_int(2, 5));
        spec.embedding_dim = rng.uniform_int(2, 4);
        data.feature_dim = spec.input_dim;
        for (int i = 0; i < n; ++i) {
            const int len = rng.uniform_int(i == 0 ? 0 : 1, 7);  // keep one possibly-empty row
            std::vector<std::int32_t> seq(static_cast<std::size_t>(len));
            for (auto& t : seq)
                t = static_cast<std::int32_t>(rng.bounded(static_cast<std::uint64_t>(spec.input_dim)));
            data.sequences.push_back(std::move(seq));
            data.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
    }
    return {spec, data};
}

std::string run_gradient_check(std::uint64_t seed) {
    double worst_fcn = 0.0, worst_gru = 0.0;
    for (int i = 0; i < 5; ++i) {
        const auto [fspec, fdata] = random_check_instance(ArchKind::FCN, derive_seed({seed, 1, static_cast<std::uint64_t>(i)}));
        worst_fcn = std::max(worst_fcn, nn::finite_difference_check(fspec, fdata, 1e-5));
        const auto [gspec, gdata] = random_check_instance(ArchKind::GRU, derive_seed({seed, 2, static_cast<std::uint64_t>(i)}));
        worst_gru = std::max(worst_gru, nn::finite_difference_check(gspec, gdata, 1e-5));
    }
    const bool pass = worst_fcn < 1e-4 && worst_gru < 1e-4;
    const json summary{{"max_relative_error_fcn", worst_fcn},
                       {"max_relative_error_gru", worst_gru},
                       {"threshold", 1e-4},
                       {"pass", pass}};
    return summary.dump(2) + "\n";
}

}  // namespace fedtrial
