#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longform/errors.hpp"

namespace longform {

// Attention weights over encoder steps for one decoder step. Entries are
// nonnegative; the full-softmax kernels normalize to 1, the expected
// monotonic kernel may leave a deficit (probability of scanning off the end),
// and the GMM kernel is a density sum with no normalization guarantee.
using AttentionWeights = std::vector<double>;

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError(std::string(what) + " must be finite");
    }
}

// Max-shifted exponential normalization over [lo, hi); zero elsewhere.
inline AttentionWeights softmax_span(std::span<const double> energies, std::size_t lo,
                                     std::size_t hi) {
    AttentionWeights weights(energies.size(), 0.0);
    double max_e = energies[lo];
    for (std::size_t j = lo + 1; j < hi; ++j) max_e = std::max(max_e, energies[j]);
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
        weights[j] = std::exp(energies[j] - max_e);
        sum += weights[j];
    }
    for (std::size_t j = lo; j < hi; ++j) weights[j] /= sum;
    return weights;
}

}  // namespace detail

// Full-sequence soft attention over one row of energies.
inline AttentionWeights soft_attention(std::span<const double> energies) {
    if (energies.empty()) throw ValidationError("soft_attention: empty energy row");
    detail::require_finite(energies, "energies");
    return detail::softmax_span(energies, 0, energies.size());
}

// Hard monotonic selection at inference time: scanning left to right from
// `start` (0-based; at least the previous decoder step's selection), pick the
// first step whose selection probability crosses 1/2. Returns nullopt when
// the scan runs off the end of the sequence.
inline std::optional<std::size_t> monotonic_select(std::span<const double> selection_probs,
                                                   std::size_t start) {
    if (selection_probs.empty()) throw ValidationError("monotonic_select: empty probability row");
    for (double p : selection_probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("monotonic_select: probabilities must lie in [0, 1]");
        }
    }
    if (start >= selection_probs.size()) {
        throw ValidationError("monotonic_select: start index past the end of the sequence");
    }
    for (std::size_t j = start; j < selection_probs.size(); ++j) {
        if (selection_probs[j] >= 0.5) return j;
    }
    return std::nullopt;
}

// Training-time replacement for the hard selection: alpha[i][j] is the
// probability that decoder step i selects encoder step j under the
// left-to-right Bernoulli scan that resumes from the previous selection.
//
//   alpha[i][j] = p[i][j] * sum_{k<=j} alpha[i-1][k] * prod_{l=k..j-1} (1 - p[i][l])
//
// with step 0 seeded by a virtual selection at position 0. Each row sums to
// at most 1; the deficit is the probability that the scan never selected.
inline std::vector<AttentionWeights> monotonic_expected(
    const std::vector<std::vector<double>>& selection_probs, std::size_t num_decode_steps) {
    if (num_decode_steps > selection_probs.size()) {
        throw ValidationError("monotonic_expected: fewer probability rows than decode steps");
    }
    std::size_t T = 0;
    for (std::size_t i = 0; i < num_decode_steps; ++i) {
        const auto& row = selection_probs[i];
        if (i == 0) T = row.size();
        if (row.empty() || row.size() != T) {
            throw ValidationError("monotonic_expected: probability rows must be nonempty and equal-length");
        }
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ValidationError("monotonic_expected: probabilities must lie in [0, 1]");
            }
        }
    }

    std::vector<AttentionWeights> alphas;
    alphas.reserve(num_decode_steps);
    AttentionWeights prev(T, 0.0);
    if (T > 0) prev[0] = 1.0;  // virtual previous selection at the first step
    bool first = true;
    for (std::size_t i = 0; i < num_decode_steps; ++i) {
        const auto& p = selection_probs[i];
        AttentionWeights alpha(T, 0.0);
        double carry = 0.0;  // sum_{k<=j} alpha_prev[k] * prod_{l=k..j-1}(1-p[l])
        for (std::size_t j = 0; j < T; ++j) {
            const double arrival = first ? (j == 0 ? 1.0 : 0.0) : prev[j];
            carry = arrival + (j == 0 ? 0.0 : carry * (1.0 - p[j - 1]));
            alpha[j] = p[j] * carry;
        }
        prev = alpha;
        first = false;
        alphas.push_back(std::move(alpha));
    }
    return alphas;
}

// MoChA: soft attention over a fixed lookback chunk ending at the selected
// step. chunk_size 1 recovers hard monotonic attention.
inline AttentionWeights mocha_weights(std::span<const double> energies, std::size_t selected,
                                      std::size_t chunk_size) {
    if (energies.empty()) throw ValidationError("mocha_weights: empty energy row");
    detail::require_finite(energies, "energies");
    if (selected >= energies.size()) {
        throw ValidationError("mocha_weights: selected index out of range");
    }
    if (chunk_size < 1) throw ValidationError("mocha_weights: chunk size must be at least 1");
    const std::size_t lo = selected + 1 >= chunk_size ? selected + 1 - chunk_size : 0;
    return detail::softmax_span(energies, lo, selected + 1);
}

// MILk: soft attention over the whole prefix up to the selected step.
inline AttentionWeights milk_weights(std::span<const double> energies, std::size_t selected) {
    if (energies.empty()) throw ValidationError("milk_weights: empty energy row");
    detail::require_finite(energies, "energies");
    if (selected >= energies.size()) {
        throw ValidationError("milk_weights: selected index out of range");
    }
    return detail::softmax_span(energies, 0, selected + 1);
}

// --- GMM attention ----------------------------------------------------------

inline constexpr double kVarianceFloor = 1e-8;

// Raw per-decoder-step mixture parameters, as a feedforward layer would emit
// them, plus the previous step's means. Means only ever move forward:
// mean_k = exp(log_step_k) + prev_mean_k.
struct GmmParams {
    std::vector<double> weight_logits;   // softmaxed into mixture weights
    std::vector<double> log_variances;   // variance_k = exp(log_variances_k)
    std::vector<double> log_steps;       // forward increment of each mean
    std::vector<double> prev_means;

    std::size_t components() const { return weight_logits.size(); }
};

struct GmmStep {
    AttentionWeights weights;
    std::vector<double> means;  // feed back as prev_means for the next step
};

// Mixture-of-Gaussians attention over encoder positions 1..T:
//
//   alpha[j] = sum_k w_k * (2*pi*v_k + vfloor)^(-1/2)
//                    * exp(-(j - mean_k)^2 / (2*v_k + vfloor))
//
// where w = softmax(weight_logits) and v_k = exp(log_variances_k). Returned
// weights are indexed 0-based; entry 0 is position j = 1.
inline GmmStep gmm_weights(const GmmParams& params, std::size_t T) {
    const std::size_t K = params.components();
    if (K == 0) throw ValidationError("gmm_weights: at least one mixture component required");
    if (params.log_variances.size() != K || params.log_steps.size() != K ||
        params.prev_means.size() != K) {
        throw ValidationError("gmm_weights: parameter vectors must all have length K");
    }
    if (T == 0) throw ValidationError("gmm_weights: encoder length must be positive");
    detail::require_finite(params.weight_logits, "weight logits");
    detail::require_finite(params.log_variances, "log variances");
    detail::require_finite(params.log_steps, "log steps");
    for (double m : params.prev_means) {
        if (!(m >= 0.0)) throw ValidationError("gmm_weights: previous means must be nonnegative");
    }

    std::vector<double> mix = detail::softmax_span(params.weight_logits, 0, K);
    std::vector<double> variance(K), mean(K);
    for (std::size_t k = 0; k < K; ++k) {
        variance[k] = std::exp(params.log_variances[k]);
        const double step = std::exp(params.log_steps[k]);
        if (!std::isfinite(variance[k]) || !std::isfinite(step)) {
            throw ValidationError("gmm_weights: exp overflow in variance or step; clamp the inputs");
        }
        mean[k] = step + params.prev_means[k];
    }

    GmmStep result;
    result.weights.assign(T, 0.0);
    for (std::size_t idx = 0; idx < T; ++idx) {
        const double j = static_cast<double>(idx + 1);
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * variance[k] + kVarianceFloor);
            const double d = j - mean[k];
            total += mix[k] * norm * std::exp(-(d * d) / (2.0 * variance[k] + kVarianceFloor));
        }
        result.weights[idx] = total;
    }
    result.means = std::move(mean);
    return result;
}

// Penalty on the expected forward gap between consecutive emission positions:
//
//   loss = sum_j ( alpha_cur[j] * sum_k alpha_prev[k] * max(j - k, 0) )^2
//
// Backward moves contribute nothing; two identical one-hot distributions
// score exactly zero.
inline double latency_loss(std::span<const double> alpha_prev, std::span<const double> alpha_cur) {
    if (alpha_prev.size() != alpha_cur.size()) {
        throw ValidationError("latency_loss: weight vectors must have equal length");
    }
    detail::require_finite(alpha_prev, "alpha_prev");
    detail::require_finite(alpha_cur, "alpha_cur");
    double loss = 0.0;
    for (std::size_t j = 0; j < alpha_cur.size(); ++j) {
        double expected_delay = 0.0;
        for (std::size_t k = 0; k < j; ++k) {
            expected_delay += alpha_prev[k] * static_cast<double>(j - k);
        }
        const double term = alpha_cur[j] * expected_delay;
        loss += term * term;
    }
    return loss;
}

}  // namespace longform
