#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "longform/alignment.hpp"
#include "longform/errors.hpp"
#include "longform/transcript.hpp"
#include "longform/windowing.hpp"

namespace longform {

enum class ConfidenceMode { time_based, position_based };

// Confidence of a word from its start time: peaks (at 0) in the middle of the
// window and decays linearly toward both edges. The window's actual span is
// used, so a truncated final window is scored around its own center.
inline double confidence_time(std::optional<double> word_start, const WindowSpec& window) {
    if (!word_start) {
        throw ValidationError(
            "word has no start time; time-based confidence needs timings "
            "(use position-based mode for timing-free hypotheses)");
    }
    return -std::abs(*word_start - window.center());
}

// Timing-free variant: confidence from the word's 1-based rank among the
// window's aligned words. Bounded in [-1/2, 0]; an empty window scores the
// worst possible value.
inline double confidence_position(std::size_t rank, std::size_t window_word_count) {
    if (window_word_count == 0) return -0.5;
    return -std::abs(static_cast<double>(rank) / static_cast<double>(window_word_count) - 0.5);
}

struct MergeDiagnostics {
    std::size_t pairs = 0;
    std::size_t agreements = 0;
    std::size_t conflicts_won_even = 0;
    std::size_t conflicts_won_odd = 0;
    std::size_t null_wins = 0;  // a no-prediction side outscored a real word
};

struct MergeResult {
    Transcript transcript;
    MergeDiagnostics diagnostics;
};

namespace detail {

// The window of the given parity whose span contains time t, if any. Within
// one parity the windows are disjoint, so the answer is unique.
inline const WindowSpec* window_of_parity_at(const WindowLayout& layout, Parity parity, double t) {
    if (layout.windows.empty()) return nullptr;
    const double stride = layout.window_length;  // same-parity windows step by L
    const double offset = parity == Parity::even ? 0.0 : layout.overlap();
    if (t < offset) return nullptr;
    const auto k = static_cast<std::size_t>(std::floor((t - offset) / stride));
    const std::size_t index = 2 * k + (parity == Parity::even ? 0 : 1);
    // The final window is anchored to the utterance end, so also probe the
    // preceding same-parity window when the arithmetic lands past it.
    for (std::size_t candidate : {index, index >= 2 ? index - 2 : index}) {
        if (candidate < layout.windows.size() && layout.windows[candidate].contains(t)) {
            return &layout.windows[candidate];
        }
    }
    return nullptr;
}

inline const WindowSpec& window_of_word(const WindowLayout& layout, const WordHyp& word) {
    if (word.window_index >= layout.windows.size()) {
        throw ValidationError("word '" + word.token + "' references window " +
                              std::to_string(word.window_index) + " outside the layout (" +
                              std::to_string(layout.windows.size()) + " windows)");
    }
    return layout.windows[word.window_index];
}

struct PositionIndex {
    // Per window: number of aligned (non-null side) words, and the 1-based
    // rank of each pair's word on that side.
    std::unordered_map<std::size_t, std::size_t> counts;
    std::vector<std::size_t> even_rank;
    std::vector<std::size_t> odd_rank;
};

inline PositionIndex index_positions(const Alignment& alignment) {
    PositionIndex index;
    index.even_rank.resize(alignment.pairs.size(), 0);
    index.odd_rank.resize(alignment.pairs.size(), 0);
    for (std::size_t i = 0; i < alignment.pairs.size(); ++i) {
        const AlignedPair& pair = alignment.pairs[i];
        if (pair.even) index.even_rank[i] = ++index.counts[pair.even->window_index];
        if (pair.odd) index.odd_rank[i] = ++index.counts[pair.odd->window_index];
    }
    return index;
}

}  // namespace detail

// Selects, for every aligned pair, the side with the higher confidence score
// (ties go to the even stream) and emits the winners in pair order. A pair
// whose winning side is the no-prediction marker contributes nothing.
//
// Scoring the no-prediction side: in time-based mode it inherits the matched
// word's start time and is scored in its own stream's window covering that
// time; where no such window exists — the half-windows at the utterance
// edges, which only one stream covers — the real word wins unconditionally.
// In position-based mode a missing word always scores the worst value, -1/2.
inline MergeResult merge(const Alignment& alignment, const WindowLayout& layout,
                         ConfidenceMode mode, bool lowercase = false) {
    MergeResult result;
    result.transcript.utterance_id = alignment.utterance_id;
    result.diagnostics.pairs = alignment.pairs.size();

    detail::PositionIndex positions;
    if (mode == ConfidenceMode::position_based) positions = detail::index_positions(alignment);

    auto word_score = [&](const WordHyp& word, std::size_t rank) {
        if (mode == ConfidenceMode::time_based) {
            return confidence_time(word.start, detail::window_of_word(layout, word));
        }
        return confidence_position(rank, positions.counts[word.window_index]);
    };

    for (std::size_t i = 0; i < alignment.pairs.size(); ++i) {
        const AlignedPair& pair = alignment.pairs[i];
        if (pair.is_match()) {
            const double f_even = word_score(*pair.even, positions.even_rank.empty()
                                                             ? 0
                                                             : positions.even_rank[i]);
            const double f_odd =
                word_score(*pair.odd, positions.odd_rank.empty() ? 0 : positions.odd_rank[i]);
            const bool even_wins = f_even >= f_odd;
            const WordHyp& winner = even_wins ? *pair.even : *pair.odd;
            if (tokens_equal(pair.even->token, pair.odd->token, lowercase)) {
                ++result.diagnostics.agreements;
            } else if (even_wins) {
                ++result.diagnostics.conflicts_won_even;
            } else {
                ++result.diagnostics.conflicts_won_odd;
            }
            result.transcript.words.push_back(winner);
            continue;
        }

        const bool word_is_even = pair.even.has_value();
        const WordHyp& word = word_is_even ? *pair.even : *pair.odd;

        double f_null;
        bool null_scoreable = false;
        if (mode == ConfidenceMode::time_based) {
            if (!word.start) {
                throw ValidationError(
                    "word '" + word.token +
                    "' has no start time; time-based confidence needs timings "
                    "(use position-based mode for timing-free hypotheses)");
            }
            const Parity null_parity = word_is_even ? Parity::odd : Parity::even;
            const WindowSpec* null_window =
                detail::window_of_parity_at(layout, null_parity, *word.start);
            if (null_window) {
                f_null = confidence_time(word.start, *null_window);
                null_scoreable = true;
            }
        } else {
            f_null = -0.5;
            null_scoreable = true;
        }

        if (!null_scoreable) {
            // Only one window covers this word's span; there is no competing
            // prediction to weigh it against.
            result.transcript.words.push_back(word);
            continue;
        }

        const double f_word =
            word_score(word, positions.even_rank.empty()
                                 ? 0
                                 : (word_is_even ? positions.even_rank[i] : positions.odd_rank[i]));
        const double f_even = word_is_even ? f_word : f_null;
        const double f_odd = word_is_even ? f_null : f_word;
        const bool even_wins = f_even >= f_odd;
        const bool word_wins = even_wins == word_is_even;
        if (word_wins) {
            result.transcript.words.push_back(word);
        } else {
            ++result.diagnostics.null_wins;
        }
    }
    return result;
}

// Convenience composition over a windowed hypothesis transcript:
// split_streams -> align_constrained -> merge.
inline MergeResult merge_pipeline(const Transcript& windowed, const WindowLayout& layout,
                                  ConfidenceMode mode, bool lowercase = false) {
    auto [even, odd] = split_streams(windowed);
    Alignment alignment = align_constrained(even, odd, lowercase);
    return merge(alignment, layout, mode, lowercase);
}

// Same, over per-window fragments.
inline MergeResult merge_pipeline(std::span<const Transcript> fragments,
                                  const WindowLayout& layout, ConfidenceMode mode,
                                  bool lowercase = false) {
    Transcript combined;
    for (const auto& f : fragments) {
        if (combined.utterance_id.empty()) combined.utterance_id = f.utterance_id;
        combined.words.insert(combined.words.end(), f.words.begin(), f.words.end());
    }
    return merge_pipeline(combined, layout, mode, lowercase);
}

}  // namespace longform
