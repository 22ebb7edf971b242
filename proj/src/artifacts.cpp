#include "fedtrial/artifacts.hpp"

#include <nlohmann/json.hpp>

#include "fedtrial/config.hpp"
#include "fedtrial/errors.hpp"
#include "fedtrial/io.hpp"

namespace fedtrial {

std::string metrics_to_csv(const MetricsSeries& series) {
    std::string out = "round,mean_train_loss,test_auc\n";
    for (const RoundMetrics& r : series.rounds) {
        out += std::to_string(r.round);
        out += ',';
        out += io::format_double(r.mean_train_loss);
        out += ',';
        out += io::format_double(r.test_auc);
        out += '\n';
    }
    return out;
}

std::string timings_to_csv(const MetricsSeries& series) {
    std::string out = "round,seconds\n";
    for (const RoundMetrics& r : series.rounds) {
        out += std::to_string(r.round);
        out += ',';
        out += io::format_double(r.seconds);
        out += '\n';
    }
    return out;
}

std::string local_results_to_csv(std::span<const LocalResult> results) {
    std::string out = "center_id,n_train,status,final_auc\n";
    for (const LocalResult& r : results) {
        out += std::to_string(r.center_id);
        out += ',';
        out += std::to_string(r.n_train);
        out += ',';
        if (r.trained) {
            out += "TRAINED,";
            out += io::format_double(r.auc);
        } else {
            out += "UNTRAINABLE,";
        }
        out += '\n';
    }
    return out;
}

std::string sweep_to_csv(std::span<const SweepRow> rows,
                         std::span<const std::string> metrics_paths) {
    if (rows.size() != metrics_paths.size())
        throw ShapeError("sweep_to_csv: rows and metrics paths differ in length");
    std::string out = "k,centers_included,final_auc,metrics_path\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += std::to_string(rows[i].k);
        out += ',';
        for (std::size_t c = 0; c < rows[i].centers.size(); ++c) {
            if (c > 0)
                out += ';';
            out += std::to_string(rows[i].centers[c]);
        }
        out += ',';
        out += io::format_double(rows[i].final_auc);
        out += ',';
        out += metrics_paths[i];
        out += '\n';
    }
    return out;
}

std::string make_manifest(const std::string& command, const RunConfig& config,
                          const std::map<std::string, std::string>& input_hashes,
                          const std::vector<std::string>& outputs) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [path, hash] : input_hashes)
        inputs[path] = hash;
    const nlohmann::json j{{"command", command},
                           {"seed", config.seed},
                           {"config", nlohmann::json::parse(dump_run_config(config))},
                           {"inputs", std::move(inputs)},
                           {"outputs", outputs}};
    return j.dump(2) + "\n";
}

}  // namespace fedtrial
