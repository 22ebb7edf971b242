#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedtrial/encoding.hpp"

namespace fedtrial {

struct Visit {
    int day = 0;          // days since patient epoch
    bool er = false;      // admitted through the emergency room
    std::vector<Code> codes;
};

struct PatientRecord {
    std::string patient_id;
    int center_id = 0;    // 1-based
    std::vector<Visit> visits;  // sorted ascending by day for well-formed records
};

enum class Label { TF, Control, Excluded };
enum class ExclusionReason { None, EarlyEvent, NoPrescription, InconsistentDates };

std::string to_string(Label label);
std::string to_string(ExclusionReason reason);

struct LabelOutcome {
    Label label = Label::Excluded;
    ExclusionReason reason = ExclusionReason::None;
    std::optional<int> index_day;  // present iff TF or Control
};

struct GeneratorConfig {
    int n_patients = 9867;
    int n_centers = 22;
    double center_decay = 0.72;            // geometric center-size ratio
    double target_tf_fraction = 0.21;      // of labeled patients
    double target_excluded_fraction = 0.12;

    int n_diagnosis_codes = 300;
    int n_procedure_codes = 120;
    int n_prescription_codes = 180;
    int n_risk_codes = 12;

    double zipf_alpha = 0.9;               // code popularity decay
    double mixture_strength = 0.6;         // 0 = identical centers, 1 = fully permuted
    double risk_boost = 4.0;               // sampling weight multiplier for risk codes
    double risk_weight_low = 0.5;          // per-code risk weight range
    double risk_weight_high = 1.5;
    double order_effect = 3.0;             // logit gap between the two pair orders, centered
    double pair_rate = 0.7;               // fraction of patients with the planted code pair

    int min_visits = 2;                    // pre-index visit count range
    int max_visits = 12;
    int min_codes_per_visit = 1;
    int max_codes_per_visit = 6;

    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

// Code sets the generator plants and the labeler consumes.
const std::set<Code>& default_tf_codes();
const std::set<Code>& default_clopidogrel_codes();
const Code& risk_anchor_code();
const Code& mitigator_code();

// Deterministic in config.seed; patients ordered by ascending patient_id,
// center sizes geometric (largest first).
std::vector<PatientRecord> generate_cohort(const GeneratorConfig& config);

// Applies the inclusion rules: index day = first clopidogrel prescription;
// a qualifying event is an ER visit carrying a TF code on or after the index
// day. Event within 7 days -> excluded, within (7, 365] -> TF, else control.
// Malformed records (negative or unsorted days) -> excluded.
LabelOutcome annotate(const PatientRecord& record, const std::set<Code>& tf_codes,
                      const std::set<Code>& clopidogrel_codes);

struct SplitResult {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

// Draws round(test_fraction * stratum) patients per (center, label) stratum
// into test via seeded shuffle; excluded patients must not be passed in.
SplitResult stratified_split(std::span<const PatientRecord> records,
                             std::span<const LabelOutcome> outcomes, double test_fraction,
                             std::uint64_t seed);

struct CenterPartition {
    int center_id = 0;
    std::vector<std::size_t> rows;  // indices into the record span
};

// Partitions ordered by descending record count, ties by ascending center_id
// (the sweep enumeration order).
std::vector<CenterPartition> partition_by_center(std::span<const PatientRecord> records);

// JSON Lines artifacts: one patient / label / fold assignment per line.
std::string cohort_to_jsonl(std::span<const PatientRecord> records);
std::vector<PatientRecord> cohort_from_jsonl(const std::string& text);
std::string labels_to_jsonl(std::span<const PatientRecord> records,
                            std::span<const LabelOutcome> outcomes);
// Returns (patient_id, outcome) pairs in file order.
std::vector<std::pair<std::string, LabelOutcome>> labels_from_jsonl(const std::string& text);
std::string split_to_jsonl(const SplitResult& split);
SplitResult split_from_jsonl(const std::string& text);

}  // namespace fedtrial
