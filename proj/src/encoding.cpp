#include "fedtrial/encoding.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fedtrial/cohort.hpp"
#include "fedtrial/errors.hpp"

namespace fedtrial {

std::string to_string(CodeSystem system) {
    switch (system) {
    case CodeSystem::Diagnosis: return "DIAGNOSIS";
    case CodeSystem::Procedure: return "PROCEDURE";
    case CodeSystem::Prescription: return "PRESCRIPTION";
    }
    throw ConfigError("unknown code system value");
}

CodeSystem code_system_from_string(const std::string& name) {
    if (name == "DIAGNOSIS") return CodeSystem::Diagnosis;
    if (name == "PROCEDURE") return CodeSystem::Procedure;
    if (name == "PRESCRIPTION") return CodeSystem::Prescription;
    throw ConfigError("unknown code system '" + name + "'");
}

Vocabulary::Vocabulary(std::vector<Code> codes) : codes_(std::move(codes)) {
    std::sort(codes_.begin(), codes_.end());
    codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
    for (std::size_t i = 0; i < codes_.size(); ++i)
        index_.emplace(codes_[i], static_cast<std::int32_t>(i + 1));
}

std::int32_t Vocabulary::lookup(const Code& code) const {
    const auto it = index_.find(code);
    return it == index_.end() ? 0 : it->second;
}

const Code& Vocabulary::code_at(std::int32_t index) const {
    if (index < 1 || static_cast<std::size_t>(index) > codes_.size())
        throw EncodingError("vocabulary: index " + std::to_string(index) + " has no code");
    return codes_[static_cast<std::size_t>(index) - 1];
}

std::string Vocabulary::to_jsonl() const {
    std::string out;
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        const nlohmann::json j{{"system", to_string(codes_[i].system)},
                               {"token", codes_[i].token},
                               {"index", i + 1}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

Vocabulary Vocabulary::from_jsonl(const std::string& text) {
    std::vector<Code> codes;
    std::istringstream in(text);
    std::string line;
    std::size_t expected = 1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            const auto index = j.at("index").get<std::size_t>();
            if (index != expected)
                throw IoError("vocabulary file: expected index " + std::to_string(expected) +
                              ", got " + std::to_string(index));
            codes.push_back({code_system_from_string(j.at("system").get<std::string>()),
                             j.at("token").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("vocabulary file: bad line: ") + e.what());
        }
        if (codes.size() >= 2 && !(codes[codes.size() - 2] < codes.back()))
            throw IoError("vocabulary file: entries out of canonical order near index " +
                          std::to_string(expected));
        ++expected;
    }
    return Vocabulary(std::move(codes));
}

Vocabulary build_vocabulary(std::span<const PatientRecord> records, std::span<const int> index_days,
                            int min_count) {
    if (records.size() != index_days.size())
        throw ShapeError("build_vocabulary: records and index_days differ in length");
    if (min_count < 0)
        throw ConfigError("build_vocabulary: min_count must be non-negative");
    std::map<Code, long long> counts;
    for (std::size_t i = 0; i < records.size(); ++i)
        for (const Visit& v : records[i].visits) {
            if (v.day >= index_days[i])
                continue;
            for (const Code& c : v.codes)
                ++counts[c];
        }
    std::vector<Code> kept;
    for (const auto& [code, n] : counts)
        if (n >= min_count)
            kept.push_back(code);
    return Vocabulary(std::move(kept));
}

std::vector<double> encode_multi_hot(const PatientRecord& record, int index_day,
                                     const Vocabulary& vocab) {
    std::vector<double> out(vocab.size(), 0.0);
    for (const Visit& v : record.visits) {
        if (v.day >= index_day)
            continue;
        for (const Code& c : v.codes)
            out[static_cast<std::size_t>(vocab.lookup(c))] = 1.0;
    }
    return out;
}

std::vector<std::int32_t> encode_sequence(const PatientRecord& record, int index_day,
                                          const Vocabulary& vocab, int max_seq_len) {
    if (max_seq_len < 0)
        throw ConfigError("encode_sequence: max_seq_len must be non-negative");
    std::vector<std::pair<int, const Code*>> events;
    for (const Visit& v : record.visits) {
        if (v.day >= index_day)
            continue;
        for (const Code& c : v.codes)
            events.emplace_back(v.day, &c);
    }
    // Canonical order: day, then code. Same-day visits collapse into one run,
    // so visit insertion order never shows through.
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first < b.first;
        return *a.second < *b.second;
    });
    const std::size_t keep = std::min(events.size(), static_cast<std::size_t>(max_seq_len));
    std::vector<std::int32_t> out;
    out.reserve(keep);
    for (std::size_t i = events.size() - keep; i < events.size(); ++i)
        out.push_back(vocab.lookup(*events[i].second));
    return out;
}

}  // namespace fedtrial
