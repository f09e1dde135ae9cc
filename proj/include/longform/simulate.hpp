#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "longform/alignment.hpp"
#include "longform/consensus.hpp"
#include "longform/errors.hpp"
#include "longform/rng.hpp"
#include "longform/transcript.hpp"
#include "longform/windowing.hpp"

namespace longform {

// Synthetic recognizer with two failure modes, both boundary-localized: a
// word cut by a window edge may be lost entirely, and words near the start of
// a window are recognized with an elevated error rate (missing context).
// Errors elsewhere occur at the base rate. Every decision is drawn from a
// counter-based generator keyed by (seed, window, word), so each window's
// output is independent of how many other windows exist and of evaluation
// order.
struct CorruptionConfig {
    std::uint64_t seed = 0;
    double base_error_rate = 0.05;
    double warmup_seconds = 1.0;
    double warmup_multiplier = 3.0;
    double boundary_cut_drop_prob = 0.5;
    // How an erroneous word manifests; must sum to 1.
    double substitute_prob = 0.5;
    double delete_prob = 0.3;
    double insert_prob = 0.2;
};

inline void validate(const CorruptionConfig& config) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(config.base_error_rate)) throw ValidationError("base_error_rate must be in [0, 1]");
    if (!in_unit(config.boundary_cut_drop_prob)) {
        throw ValidationError("boundary_cut_drop_prob must be in [0, 1]");
    }
    if (!in_unit(config.substitute_prob) || !in_unit(config.delete_prob) ||
        !in_unit(config.insert_prob)) {
        throw ValidationError("error mix probabilities must be in [0, 1]");
    }
    if (config.warmup_seconds < 0.0) throw ValidationError("warmup_seconds must be nonnegative");
    if (config.warmup_multiplier < 1.0) throw ValidationError("warmup_multiplier must be at least 1");
    const double mix = config.substitute_prob + config.delete_prob + config.insert_prob;
    if (std::abs(mix - 1.0) > 1e-12) {
        throw ValidationError("substitute/delete/insert probabilities must sum to 1");
    }
}

struct ReferenceWord {
    std::string token;
    double start = 0.0;
    double duration = 0.0;
};

// Extracts validated reference words from a transcript: timings present,
// time-ordered, nonoverlapping.
inline std::vector<ReferenceWord> reference_words_of(const Transcript& transcript) {
    std::vector<ReferenceWord> words;
    words.reserve(transcript.words.size());
    double previous_end = 0.0;
    for (const auto& w : transcript.words) {
        if (!w.start || !w.duration) {
            throw ValidationError("reference word '" + w.token + "' in utterance '" +
                                  transcript.utterance_id + "' has no timing");
        }
        if (*w.start + 1e-9 < previous_end) {
            throw ValidationError("reference words must be time-ordered and nonoverlapping ('" +
                                  w.token + "' in utterance '" + transcript.utterance_id + "')");
        }
        previous_end = *w.start + *w.duration;
        words.push_back(ReferenceWord{w.token, *w.start, *w.duration});
    }
    return words;
}

inline std::string substituted_token(const std::string& token) { return token + "*"; }

inline constexpr const char* kInsertedToken = "%ins";

// Runs the synthetic recognizer over one window. Words are included when
// their start lies inside the window span. A word whose span crosses a window
// edge is dropped with boundary_cut_drop_prob and otherwise emitted intact;
// every other word may be substituted, deleted, or followed by an inserted
// filler according to the configured rates.
inline std::vector<WordHyp> simulate_window(std::span<const ReferenceWord> ref_words,
                                            const WindowSpec& window,
                                            const CorruptionConfig& config) {
    validate(config);
    std::vector<WordHyp> out;
    for (std::size_t i = 0; i < ref_words.size(); ++i) {
        const ReferenceWord& ref = ref_words[i];
        if (!window.contains(ref.start)) continue;

        const double u_cut = counter_uniform(config.seed, window.index, i, 0);
        const double u_err = counter_uniform(config.seed, window.index, i, 1);
        const double u_mix = counter_uniform(config.seed, window.index, i, 2);

        const bool crosses_edge = ref.start < window.start || ref.start + ref.duration > window.end();
        if (crosses_edge) {
            if (u_cut < config.boundary_cut_drop_prob) continue;
            out.push_back(WordHyp{ref.token, ref.start, ref.duration, window.index});
            continue;
        }

        double rate = config.base_error_rate;
        if (ref.start - window.start < config.warmup_seconds) {
            rate = std::min(1.0, rate * config.warmup_multiplier);
        }
        if (u_err >= rate) {
            out.push_back(WordHyp{ref.token, ref.start, ref.duration, window.index});
            continue;
        }
        if (u_mix < config.substitute_prob) {
            out.push_back(WordHyp{substituted_token(ref.token), ref.start, ref.duration,
                                  window.index});
        } else if (u_mix < config.substitute_prob + config.delete_prob) {
            // deleted
        } else {
            out.push_back(WordHyp{ref.token, ref.start, ref.duration, window.index});
            out.push_back(WordHyp{kInsertedToken, ref.start + ref.duration / 2.0,
                                  ref.duration / 2.0, window.index});
        }
    }
    return out;
}

enum class LayoutKind { overlapping, fixed };

struct WindowedHypotheses {
    std::string utterance_id;
    WindowLayout layout;
    std::vector<Transcript> fragments;  // one per window, possibly empty

    Transcript combined() const {
        Transcript all{utterance_id, {}};
        for (const auto& f : fragments) {
            all.words.insert(all.words.end(), f.words.begin(), f.words.end());
        }
        return all;
    }
};

// Lays out each reference utterance and runs the recognizer on every window.
inline std::vector<WindowedHypotheses> simulate_corpus(std::span<const Transcript> references,
                                                       LayoutKind kind, double window_length,
                                                       const CorruptionConfig& config) {
    validate(config);
    std::vector<WindowedHypotheses> corpus;
    corpus.reserve(references.size());
    for (const auto& reference : references) {
        const auto ref_words = reference_words_of(reference);
        double utterance_length = 0.0;
        for (const auto& w : ref_words) utterance_length = std::max(utterance_length, w.start + w.duration);
        WindowedHypotheses hyp;
        hyp.utterance_id = reference.utterance_id;
        if (utterance_length <= 0.0) {
            hyp.layout = WindowLayout{0.0, window_length, {}};
            corpus.push_back(std::move(hyp));
            continue;
        }
        hyp.layout = kind == LayoutKind::overlapping
                         ? layout_overlapping(utterance_length, window_length)
                         : layout_fixed(utterance_length, window_length);
        hyp.fragments.reserve(hyp.layout.windows.size());
        for (const auto& window : hyp.layout.windows) {
            hyp.fragments.push_back(
                Transcript{reference.utterance_id, simulate_window(ref_words, window, config)});
        }
        corpus.push_back(std::move(hyp));
    }
    return corpus;
}

// Deterministic synthetic reference: dense speech at roughly 2.8 words per
// second, tokens w0001, w0002, ...
inline Transcript make_synthetic_reference(std::uint64_t seed, double duration_seconds,
                                           const std::string& utterance_id = "synth") {
    Transcript reference{utterance_id, {}};
    constexpr std::uint64_t kStream = 0x5EEDFACE;
    double t = 0.0;
    for (std::size_t i = 0;; ++i) {
        const double dur = 0.18 + 0.20 * counter_uniform(seed, kStream, i, 0);
        const double gap = 0.01 + 0.14 * counter_uniform(seed, kStream, i, 1);
        if (t + dur > duration_seconds) break;
        char token[16];
        std::snprintf(token, sizeof(token), "w%05zu", i + 1);
        reference.words.push_back(WordHyp{token, t, dur, 0});
        t += dur + gap;
    }
    return reference;
}

// --- Segmentation-versus-overlap study --------------------------------------

struct StudyTrial {
    std::uint64_t seed = 0;
    WerReport fixed;
    WerReport overlapping;
};

struct StudyReport {
    double window_length = 0.0;
    std::uint64_t base_seed = 0;
    std::vector<StudyTrial> trials;
    WerReport fixed_totals;        // error counts pooled over all trials
    WerReport overlapping_totals;
    double mean_fixed_wer = 0.0;
    double mean_overlapping_wer = 0.0;
    double relative_reduction = 0.0;  // (mean_fixed - mean_overlapping) / mean_fixed
    std::size_t overlapping_wins = 0;
    std::size_t overlapping_losses = 0;
    std::size_t ties = 0;
};

namespace detail {

inline WerReport pooled_wer(const std::vector<WerReport>& reports) {
    std::size_t n = 0, s = 0, d = 0, ins = 0;
    for (const auto& r : reports) {
        n += r.n_ref;
        s += r.substitutions;
        d += r.deletions;
        ins += r.insertions;
    }
    return make_wer_report(n, s, d, ins);
}

}  // namespace detail

// Runs `trials` seeded comparisons of the two decoding strategies on the same
// references: fixed-length segmentation scored as the plain concatenation of
// window transcripts, versus the overlapping layout scored after the
// consensus merge. Per-trial seeds are base_seed, base_seed + 1, ...
inline StudyReport study(std::span<const Transcript> references, double window_length,
                         const CorruptionConfig& config, std::size_t trials,
                         ConfidenceMode mode = ConfidenceMode::time_based) {
    if (trials < 1) throw ValidationError("study: at least one trial required");
    validate(config);

    StudyReport report;
    report.window_length = window_length;
    report.base_seed = config.seed;

    std::vector<WerReport> fixed_all, overlap_all;
    double sum_fixed = 0.0, sum_overlap = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        CorruptionConfig trial_config = config;
        trial_config.seed = config.seed + trial;

        std::vector<WerReport> fixed_utts, overlap_utts;
        const auto fixed_corpus =
            simulate_corpus(references, LayoutKind::fixed, window_length, trial_config);
        const auto overlap_corpus =
            simulate_corpus(references, LayoutKind::overlapping, window_length, trial_config);
        for (std::size_t u = 0; u < references.size(); ++u) {
            const auto ref_tokens = tokens_of(references[u]);
            fixed_utts.push_back(score_wer(ref_tokens, tokens_of(fixed_corpus[u].combined())));
            const MergeResult merged = merge_pipeline(overlap_corpus[u].combined(),
                                                      overlap_corpus[u].layout, mode);
            overlap_utts.push_back(score_wer(ref_tokens, tokens_of(merged.transcript)));
        }

        StudyTrial entry;
        entry.seed = trial_config.seed;
        entry.fixed = detail::pooled_wer(fixed_utts);
        entry.overlapping = detail::pooled_wer(overlap_utts);
        sum_fixed += entry.fixed.wer;
        sum_overlap += entry.overlapping.wer;
        if (entry.overlapping.wer < entry.fixed.wer) {
            ++report.overlapping_wins;
        } else if (entry.overlapping.wer > entry.fixed.wer) {
            ++report.overlapping_losses;
        } else {
            ++report.ties;
        }
        fixed_all.push_back(entry.fixed);
        overlap_all.push_back(entry.overlapping);
        report.trials.push_back(std::move(entry));
    }

    report.fixed_totals = detail::pooled_wer(fixed_all);
    report.overlapping_totals = detail::pooled_wer(overlap_all);
    report.mean_fixed_wer = sum_fixed / static_cast<double>(trials);
    report.mean_overlapping_wer = sum_overlap / static_cast<double>(trials);
    report.relative_reduction =
        report.mean_fixed_wer > 0.0
            ? (report.mean_fixed_wer - report.mean_overlapping_wer) / report.mean_fixed_wer
            : 0.0;
    return report;
}

}  // namespace longform
