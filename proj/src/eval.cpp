#include "fedtrial/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedtrial/errors.hpp"

namespace fedtrial {

namespace {

// Average ranks, 1-based; tied values share the mean of their positions.
// Ranks are exact multiples of 0.5, so downstream sums stay exact.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]])
            ++j;
        // positions i+1..j share rank (i+1 + j) / 2
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

}  // namespace

double roc_auc(const ScoredSet& scored) {
    if (scored.scores.size() != scored.labels.size())
        throw ShapeError("roc_auc: scores and labels differ in length");
    if (scored.scores.empty())
        throw ShapeError("roc_auc: empty input");
    std::size_t n_pos = 0;
    for (int y : scored.labels) {
        if (y != 0 && y != 1)
            throw ShapeError("roc_auc: labels must be 0 or 1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = scored.labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("roc_auc: undefined for single-class input");

    const std::vector<double> ranks = average_ranks(scored.scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i)
        if (scored.labels[i] == 1)
            rank_sum += ranks[i];
    // Mann-Whitney U = rank_sum - n_pos(n_pos+1)/2; both terms exact.
    const double u = rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ShapeError("spearman: inputs differ in length");
    if (x.size() < 2)
        throw MetricError("spearman: needs at least two points");
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const auto n = static_cast<double>(x.size());
    const double mean = 0.5 * (n + 1.0);  // ranks always average to (n+1)/2
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - mean;
        const double b = ry[i] - mean;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw MetricError("spearman: undefined when an input has constant ranks");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace fedtrial
