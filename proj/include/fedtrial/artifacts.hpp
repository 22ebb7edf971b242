#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedtrial/fed.hpp"

namespace fedtrial {

struct RunConfig;

// round,mean_train_loss,test_auc with LF endings and '.' decimals; rerunning
// an identical configuration reproduces this file byte for byte.
std::string metrics_to_csv(const MetricsSeries& series);

// round,seconds; wall-clock timings live apart from metrics.csv so the
// deterministic artifact stays byte-stable.
std::string timings_to_csv(const MetricsSeries& series);

// center_id,n_train,status,final_auc; untrained centers carry the
// UNTRAINABLE status and an empty value.
std::string local_results_to_csv(std::span<const LocalResult> results);

// k,centers_included,final_auc,metrics_path; center ids joined with ';'.
std::string sweep_to_csv(std::span<const SweepRow> rows,
                         std::span<const std::string> metrics_paths);

// Reproducibility record: command, seed, full config echo, content hash per
// input file, list of outputs. No timestamps.
std::string make_manifest(const std::string& command, const RunConfig& config,
                          const std::map<std::string, std::string>& input_hashes,
                          const std::vector<std::string>& outputs);

}  // namespace fedtrial
