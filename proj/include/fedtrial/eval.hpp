#pragma once

#include <span>
#include <vector>

namespace fedtrial {

struct ScoredSet {
    std::vector<double> scores;  // in [0, 1]
    std::vector<int> labels;     // 0 or 1
};

// Rank-based (Mann-Whitney) AUC with average-rank tie handling: the fraction
// of (positive, negative) pairs where the positive scores higher, ties
// counted 0.5. Throws MetricError when only one class is present.
double roc_auc(const ScoredSet& scored);

// Spearman rank correlation: Pearson correlation of average ranks.
// Throws MetricError when either input has zero rank variance or n < 2.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace fedtrial
