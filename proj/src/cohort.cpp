#include "fedtrial/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "fedtrial/errors.hpp"
#include "fedtrial/rng.hpp"

namespace fedtrial {

std::string to_string(Label label) {
    switch (label) {
    case Label::TF: return "TF";
    case Label::Control: return "CONTROL";
    case Label::Excluded: return "EXCLUDED";
    }
    throw ConfigError("unknown label value");
}

std::string to_string(ExclusionReason reason) {
    switch (reason) {
    case ExclusionReason::None: return "NONE";
    case ExclusionReason::EarlyEvent: return "EARLY_EVENT";
    case ExclusionReason::NoPrescription: return "NO_PRESCRIPTION";
    case ExclusionReason::InconsistentDates: return "INCONSISTENT_DATES";
    }
    throw ConfigError("unknown exclusion reason value");
}

namespace {

Label label_from_string(const std::string& name) {
    if (name == "TF") return Label::TF;
    if (name == "CONTROL") return Label::Control;
    if (name == "EXCLUDED") return Label::Excluded;
    throw IoError("labels file: unknown label '" + name + "'");
}

ExclusionReason reason_from_string(const std::string& name) {
    if (name == "EARLY_EVENT") return ExclusionReason::EarlyEvent;
    if (name == "NO_PRESCRIPTION") return ExclusionReason::NoPrescription;
    if (name == "INCONSISTENT_DATES") return ExclusionReason::InconsistentDates;
    throw IoError("labels file: unknown exclusion reason '" + name + "'");
}

bool contains_any(const Visit& visit, const std::set<Code>& codes) {
    for (const Code& c : visit.codes)
        if (codes.count(c) != 0)
            return true;
    return false;
}

}  // namespace

LabelOutcome annotate(const PatientRecord& record, const std::set<Code>& tf_codes,
                      const std::set<Code>& clopidogrel_codes) {
    if (tf_codes.empty() || clopidogrel_codes.empty())
        throw ConfigError("annotate: code sets must be non-empty");
    for (const Code& c : tf_codes)
        if (clopidogrel_codes.count(c) != 0)
            throw ConfigError("annotate: TF and clopidogrel code sets overlap on '" + c.token + "'");

    for (std::size_t i = 0; i < record.visits.size(); ++i) {
        if (record.visits[i].day < 0 ||
            (i > 0 && record.visits[i].day < record.visits[i - 1].day))
            return {Label::Excluded, ExclusionReason::InconsistentDates, std::nullopt};
    }

    std::optional<int> index_day;
    for (const Visit& v : record.visits)
        if (contains_any(v, clopidogrel_codes)) {
            index_day = v.day;  // visits sorted, so this is the first prescription
            break;
        }
    if (!index_day)
        return {Label::Excluded, ExclusionReason::NoPrescription, std::nullopt};

    // A qualifying event must arrive through the emergency room on or after
    // the index day. Within 7 days it voids the patient; within the year it
    // labels them TF.
    bool early = false;
    bool in_window = false;
    for (const Visit& v : record.visits) {
        if (!v.er || v.day < *index_day || !contains_any(v, tf_codes))
            continue;
        const int offset = v.day - *index_day;
        if (offset <= 7)
            early = true;
        else if (offset <= 365)
            in_window = true;
    }
    if (early)
        return {Label::Excluded, ExclusionReason::EarlyEvent, std::nullopt};
    if (in_window)
        return {Label::TF, ExclusionReason::None, index_day};
    return {Label::Control, ExclusionReason::None, index_day};
}

SplitResult stratified_split(std::span<const PatientRecord> records,
                             std::span<const LabelOutcome> outcomes, double test_fraction,
                             std::uint64_t seed) {
    if (records.size() != outcomes.size())
        throw ShapeError("stratified_split: records and outcomes differ in length");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("stratified_split: test_fraction must lie in (0, 1)");
    if (records.empty())
        throw DataError("stratified_split: empty labeled cohort");

    std::map<std::pair<int, int>, std::vector<std::string>> strata;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (outcomes[i].label == Label::Excluded)
            throw DataError("stratified_split: excluded patient '" + records[i].patient_id +
                            "' must be removed before splitting");
        const int y = outcomes[i].label == Label::TF ? 1 : 0;
        strata[{records[i].center_id, y}].push_back(records[i].patient_id);
    }

    SplitResult split;
    for (auto& [key, ids] : strata) {
        std::sort(ids.begin(), ids.end());
        Rng rng(derive_seed({seed, seed_tag::kSplit, static_cast<std::uint64_t>(key.first),
                             static_cast<std::uint64_t>(key.second)}));
        rng.shuffle(ids);
        const auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(ids.size())));
        for (std::size_t i = 0; i < ids.size(); ++i)
            (i < n_test ? split.test_ids : split.train_ids).push_back(std::move(ids[i]));
    }
    std::sort(split.train_ids.begin(), split.train_ids.end());
    std::sort(split.test_ids.begin(), split.test_ids.end());
    return split;
}

std::vector<CenterPartition> partition_by_center(std::span<const PatientRecord> records) {
    std::map<int, std::vector<std::size_t>> by_center;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_center[records[i].center_id].push_back(i);
    std::vector<CenterPartition> parts;
    parts.reserve(by_center.size());
    for (auto& [center, rows] : by_center)
        parts.push_back({center, std::move(rows)});
    std::sort(parts.begin(), parts.end(), [](const CenterPartition& a, const CenterPartition& b) {
        if (a.rows.size() != b.rows.size())
            return a.rows.size() > b.rows.size();
        return a.center_id < b.center_id;
    });
    return parts;
}

namespace {

nlohmann::json record_to_json(const PatientRecord& r) {
    nlohmann::json visits = nlohmann::json::array();
    for (const Visit& v : r.visits) {
        nlohmann::json codes = nlohmann::json::array();
        for (const Code& c : v.codes)
            codes.push_back({{"system", to_string(c.system)}, {"token", c.token}});
        visits.push_back({{"day", v.day}, {"er", v.er}, {"codes", std::move(codes)}});
    }
    return {{"patient_id", r.patient_id}, {"center_id", r.center_id}, {"visits", std::move(visits)}};
}

PatientRecord record_from_json(const nlohmann::json& j) {
    PatientRecord r;
    r.patient_id = j.at("patient_id").get<std::string>();
    r.center_id = j.at("center_id").get<int>();
    if (r.patient_id.empty())
        throw DataError("cohort file: empty patient_id");
    if (r.center_id < 1)
        throw DataError("cohort file: center_id must be >= 1 for patient '" + r.patient_id + "'");
    for (const auto& vj : j.at("visits")) {
        Visit v;
        v.day = vj.at("day").get<int>();
        v.er = vj.at("er").get<bool>();
        for (const auto& cj : vj.at("codes"))
            v.codes.push_back({code_system_from_string(cj.at("system").get<std::string>()),
                               cj.at("token").get<std::string>()});
        if (v.codes.empty())
            throw DataError("cohort file: visit without codes for patient '" + r.patient_id + "'");
        r.visits.push_back(std::move(v));
    }
    return r;
}

template <typename Fn>
void for_each_jsonl(const std::string& text, const char* what, Fn&& fn) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string(what) + ": bad json at line " + std::to_string(lineno) +
                          ": " + e.what());
        }
        try {
            fn(j);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string(what) + ": bad record at line " + std::to_string(lineno) +
                          ": " + e.what());
        }
    }
}

}  // namespace

std::string cohort_to_jsonl(std::span<const PatientRecord> records) {
    std::string out;
    for (const PatientRecord& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<PatientRecord> cohort_from_jsonl(const std::string& text) {
    std::vector<PatientRecord> records;
    std::set<std::string> seen;
    for_each_jsonl(text, "cohort file", [&](const nlohmann::json& j) {
        records.push_back(record_from_json(j));
        if (!seen.insert(records.back().patient_id).second)
            throw DataError("cohort file: duplicate patient_id '" + records.back().patient_id + "'");
    });
    return records;
}

std::string labels_to_jsonl(std::span<const PatientRecord> records,
                            std::span<const LabelOutcome> outcomes) {
    if (records.size() != outcomes.size())
        throw ShapeError("labels_to_jsonl: records and outcomes differ in length");
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        nlohmann::json j{{"patient_id", records[i].patient_id},
                         {"label", to_string(outcomes[i].label)}};
        if (outcomes[i].label == Label::Excluded)
            j["reason"] = to_string(outcomes[i].reason);
        else
            j["index_day"] = outcomes[i].index_day.value();
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, LabelOutcome>> labels_from_jsonl(const std::string& text) {
    std::vector<std::pair<std::string, LabelOutcome>> out;
    for_each_jsonl(text, "labels file", [&](const nlohmann::json& j) {
        LabelOutcome o;
        o.label = label_from_string(j.at("label").get<std::string>());
        if (o.label == Label::Excluded) {
            o.reason = reason_from_string(j.at("reason").get<std::string>());
        } else {
            o.index_day = j.at("index_day").get<int>();
        }
        out.emplace_back(j.at("patient_id").get<std::string>(), std::move(o));
    });
    return out;
}

std::string split_to_jsonl(const SplitResult& split) {
    std::vector<std::pair<std::string, const char*>> rows;
    rows.reserve(split.train_ids.size() + split.test_ids.size());
    for (const auto& id : split.train_ids)
        rows.emplace_back(id, "train");
    for (const auto& id : split.test_ids)
        rows.emplace_back(id, "test");
    std::sort(rows.begin(), rows.end());
    std::string out;
    for (const auto& [id, fold] : rows) {
        out += nlohmann::json{{"patient_id", id}, {"fold", fold}}.dump();
        out += '\n';
    }
    return out;
}

SplitResult split_from_jsonl(const std::string& text) {
    SplitResult split;
    for_each_jsonl(text, "split file", [&](const nlohmann::json& j) {
        const auto fold = j.at("fold").get<std::string>();
        const auto id = j.at("patient_id").get<std::string>();
        if (fold == "train")
            split.train_ids.push_back(id);
        else if (fold == "test")
            split.test_ids.push_back(id);
        else
            throw IoError("split file: unknown fold '" + fold + "'");
    });
    return split;
}

}  // namespace fedtrial
