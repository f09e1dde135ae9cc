// Test-only reference implementations: small, slow, and independent of the
// library code paths they are used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "longform/transcript.hpp"

namespace oracles {

// Minimum cost over every monotone alignment of the two streams, found by
// plain recursion. A match is admissible only for adjacent windows and costs
// 0 (equal tokens) or 1; leaving a word unpaired costs 1.
inline long constrained_alignment_cost(const longform::Transcript& even,
                                       const longform::Transcript& odd) {
    const auto& e = even.words;
    const auto& o = odd.words;
    auto recurse = [&](auto&& self, std::size_t i, std::size_t j) -> long {
        if (i == e.size() && j == o.size()) return 0;
        long best = static_cast<long>(e.size() + o.size()) + 1;
        if (i < e.size() && j < o.size()) {
            const std::size_t wi = e[i].window_index;
            const std::size_t wj = o[j].window_index;
            if ((wi > wj ? wi - wj : wj - wi) == 1) {
                best = std::min(best,
                                self(self, i + 1, j + 1) + (e[i].token == o[j].token ? 0 : 1));
            }
        }
        if (i < e.size()) best = std::min(best, self(self, i + 1, j) + 1);
        if (j < o.size()) best = std::min(best, self(self, i, j + 1) + 1);
        return best;
    };
    return recurse(recurse, 0, 0);
}

// Unit-cost edit distance by plain recursion.
inline long levenshtein_cost(const std::vector<std::string>& ref,
                             const std::vector<std::string>& hyp) {
    auto recurse = [&](auto&& self, std::size_t i, std::size_t j) -> long {
        if (i == ref.size()) return static_cast<long>(hyp.size() - j);
        if (j == hyp.size()) return static_cast<long>(ref.size() - i);
        long best = self(self, i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
        best = std::min(best, self(self, i + 1, j) + 1);
        best = std::min(best, self(self, i, j + 1) + 1);
        return best;
    };
    return recurse(recurse, 0, 0);
}

struct MonotonicEnumeration {
    std::vector<std::vector<double>> alpha;  // alpha[i][j] = P(step i selects j)
    std::vector<double> no_selection;        // P(step i selects nothing)
};

// Expected monotonic attention by enumerating every sequence of Bernoulli
// draws. Step i resumes scanning at the position step i-1 selected; a scan
// that falls off the end leaves this and all later steps without a selection.
inline MonotonicEnumeration enumerate_monotonic(const std::vector<std::vector<double>>& p,
                                                std::size_t steps) {
    const std::size_t T = p.empty() ? 0 : p[0].size();
    MonotonicEnumeration result;
    result.alpha.assign(steps, std::vector<double>(T, 0.0));
    result.no_selection.assign(steps, 0.0);

    auto recurse = [&](auto&& self, std::size_t step, std::size_t pos, double prob) -> void {
        if (prob == 0.0) return;
        if (step == steps) return;
        if (pos == T) {
            for (std::size_t k = step; k < steps; ++k) result.no_selection[k] += prob;
            return;
        }
        // draw = select
        result.alpha[step][pos] += prob * p[step][pos];
        self(self, step + 1, pos, prob * p[step][pos]);
        // draw = move on
        self(self, step, pos + 1, prob * (1.0 - p[step][pos]));
    };
    recurse(recurse, 0, 0, 1.0);
    return result;
}

// Two-sided exact sign test against a fair coin; ties are excluded by the
// caller. Returns 1 when there are no informative observations.
inline double sign_test_p_value(std::size_t wins, std::size_t losses) {
    const std::size_t n = wins + losses;
    if (n == 0) return 1.0;
    const std::size_t k = std::min(wins, losses);
    // P(X <= k) for X ~ Binomial(n, 1/2)
    double pmf = std::pow(0.5, static_cast<double>(n));  // P(X = 0)
    double tail = 0.0;
    for (std::size_t x = 0; x <= k; ++x) {
        tail += pmf;
        pmf *= static_cast<double>(n - x) / static_cast<double>(x + 1);
    }
    return std::min(1.0, 2.0 * tail);
}

}  // namespace oracles
