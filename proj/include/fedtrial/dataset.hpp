#pragma once

#include "fedtrial/errors.hpp"

#include <cstdint>
#include <vector>

namespace fedtrial {

enum class ArchKind { FCN, GRU };

// Encoded training/eval examples for one architecture family. FCN rows are
// dense multi-hot vectors; GRU rows are token index sequences. Exactly one
// of the two payloads is populated, matching `kind`.
struct Dataset {
    ArchKind kind = ArchKind::FCN;
    int feature_dim = 0; // vocabulary size: multi-hot length / token index space
    std::vector<std::vector<double>> dense;
    std::vector<std::vector<std::int32_t>> sequences;
    std::vector<int> labels; // 0/1

    std::size_t size() const { return labels.size(); }

    void check_consistent() const {
        const std::size_t rows = kind == ArchKind::FCN ? dense.size() : sequences.size();
        if (rows != labels.size()) throw ShapeError("dataset rows and labels differ in length");
        if (kind == ArchKind::FCN && !sequences.empty())
            throw ShapeError("FCN dataset carries sequences");
        if (kind == ArchKind::GRU && !dense.empty())
            throw ShapeError("GRU dataset carries dense rows");
    }
};

} // namespace fedtrial
