#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "vfcw/collision.hpp"
#include "vfcw/error.hpp"

namespace vfcw::metrics {

struct MatchResult {
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;
    std::vector<std::pair<CollisionEvent, CollisionEvent>> matched_pairs; ///< (expected, predicted)
};

struct Score {
    double precision = 1.0;
    double recall = 1.0;
};

/// Distance between two closed intervals; zero when they overlap.
inline double interval_gap(const CollisionEvent& a, const CollisionEvent& b) {
    return std::max({0.0, a.start - b.end, b.start - a.end});
}

/// One-to-one matching on identical vehicle pairs whose episode intervals are
/// within `time_tolerance`, taking the smallest gaps first.
inline MatchResult match_warnings(std::span<const CollisionEvent> expected, std::span<const CollisionEvent> predicted,
                                  double time_tolerance) {
    if (!(time_tolerance >= 0.0)) throw DomainError("time_tolerance must be non-negative");
    struct Candidate {
        double gap;
        std::size_t e;
        std::size_t p;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        for (std::size_t j = 0; j < predicted.size(); ++j) {
            if (expected[i].pair != predicted[j].pair) continue;
            const double g = interval_gap(expected[i], predicted[j]);
            if (g <= time_tolerance + kTimeEps) cands.push_back({g, i, j});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.gap, a.e, a.p) < std::tie(b.gap, b.e, b.p);
    });
    std::vector<bool> used_e(expected.size()), used_p(predicted.size());
    MatchResult m;
    for (const auto& c : cands) {
        if (used_e[c.e] || used_p[c.p]) continue;
        used_e[c.e] = used_p[c.p] = true;
        m.matched_pairs.emplace_back(expected[c.e], predicted[c.p]);
    }
    m.true_positives = static_cast<int>(m.matched_pairs.size());
    m.false_positives = static_cast<int>(predicted.size()) - m.true_positives;
    m.false_negatives = static_cast<int>(expected.size()) - m.true_positives;
    return m;
}

/// Empty denominators score 1 (nothing was wrong).
inline Score score(int tp, int fp, int fn) {
    Score s;
    s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
    s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
    return s;
}

inline Score score(const MatchResult& m) { return score(m.true_positives, m.false_positives, m.false_negatives); }

} // namespace vfcw::metrics
