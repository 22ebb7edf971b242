#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fedtrial {

struct PatientRecord;

enum class CodeSystem { Diagnosis, Procedure, Prescription };

std::string to_string(CodeSystem system);
CodeSystem code_system_from_string(const std::string& name);

// Identity is the (system, token) pair; tokens compare case-sensitively.
// Ordering: system in declaration order, then token, which is the canonical
// order used everywhere (vocabularies, intra-visit sorting).
struct Code {
    CodeSystem system = CodeSystem::Diagnosis;
    std::string token;

    auto operator<=>(const Code&) const = default;
};

// Immutable after build. Index 0 is always the UNKNOWN slot; real codes get
// contiguous indices 1..size-1 in canonical code order.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<Code> codes);

    std::size_t size() const { return codes_.size() + 1; }
    // Returns the code's index, or 0 (UNKNOWN) when absent.
    std::int32_t lookup(const Code& code) const;
    // code_at(i) valid for i in [1, size); index 0 has no code.
    const Code& code_at(std::int32_t index) const;
    const std::vector<Code>& codes() const { return codes_; }

    std::string to_jsonl() const;
    static Vocabulary from_jsonl(const std::string& text);

private:
    std::vector<Code> codes_;
    std::map<Code, std::int32_t> index_;
};

// Counts codes in visits strictly before each record's index day; every code
// seen at least min_count times (with multiplicity) is included. Records and
// index_days are parallel; pass training records only.
Vocabulary build_vocabulary(std::span<const PatientRecord> records, std::span<const int> index_days,
                            int min_count);

// 0/1 vector of length vocab.size(); position i set iff code i appears in any
// visit with day < index_day. Codes outside the vocabulary set the UNKNOWN
// position.
std::vector<double> encode_multi_hot(const PatientRecord& record, int index_day,
                                     const Vocabulary& vocab);

// Pre-index codes flattened in (day, system, token) order and mapped to vocab
// indices; same-day visits merge into one ordered run. Keeps the most recent
// max_seq_len tokens.
std::vector<std::int32_t> encode_sequence(const PatientRecord& record, int index_day,
                                          const Vocabulary& vocab, int max_seq_len = 256);

}  // namespace fedtrial
