#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "longform/errors.hpp"
#include "longform/transcript.hpp"

namespace longform {

// A time interval [start, start + length) of the utterance. Non-final windows
// of an overlapping layout start at index * L/2 and have length L; the final
// window is anchored to the utterance end and may be shorter (never longer).
struct WindowSpec {
    std::size_t index = 0;
    double start = 0.0;
    double length = 0.0;

    double end() const { return start + length; }
    double center() const { return start + length / 2.0; }
    Parity stream() const { return parity_of(index); }
    bool contains(double t) const { return t >= start && t < end(); }
    bool overlaps(const WindowSpec& other) const {
        return start < other.end() && other.start < end();
    }

    bool operator==(const WindowSpec&) const = default;
};

struct WindowLayout {
    double utterance_length = 0.0;
    double window_length = 0.0;  // L; overlap D = L/2 is derived, never stored
    std::vector<WindowSpec> windows;

    double overlap() const { return window_length / 2.0; }
};

// 50%-overlap layout: window i covers [i*L/2, i*L/2 + L), clipped so the last
// window ends exactly at the utterance end. Every point past the first half
// window (and before the final half window) is covered by exactly two windows.
inline WindowLayout layout_overlapping(double utterance_length, double window_length) {
    if (utterance_length <= 0.0) throw ValidationError("utterance length must be positive");
    if (window_length <= 0.0) throw ValidationError("window length must be positive");

    WindowLayout layout{utterance_length, window_length, {}};
    if (utterance_length <= window_length) {
        layout.windows.push_back(WindowSpec{0, 0.0, utterance_length});
        return layout;
    }
    const double half = window_length / 2.0;
    for (std::size_t i = 0;; ++i) {
        const double start = static_cast<double>(i) * half;
        if (start >= utterance_length - half) break;
        const double end = std::min(start + window_length, utterance_length);
        layout.windows.push_back(WindowSpec{i, start, end - start});
    }
    return layout;
}

// Disjoint fixed-length segmentation [kL, (k+1)L), final window truncated.
// The naive baseline the overlapping layout is compared against.
inline WindowLayout layout_fixed(double utterance_length, double window_length) {
    if (utterance_length <= 0.0) throw ValidationError("utterance length must be positive");
    if (window_length <= 0.0) throw ValidationError("window length must be positive");

    WindowLayout layout{utterance_length, window_length, {}};
    for (std::size_t k = 0;; ++k) {
        const double start = static_cast<double>(k) * window_length;
        if (start >= utterance_length) break;
        const double end = std::min(start + window_length, utterance_length);
        layout.windows.push_back(WindowSpec{k, start, end - start});
    }
    return layout;
}

// Splits a windowed transcript into the two parity streams. Within a stream
// words are ordered by window, preserving word order inside each window;
// same-parity windows are disjoint in time, so each stream reads as one
// continuous hypothesis.
inline std::pair<Transcript, Transcript> split_streams(const Transcript& transcript) {
    std::vector<std::size_t> order(transcript.words.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return transcript.words[a].window_index < transcript.words[b].window_index;
    });

    Transcript even{transcript.utterance_id, {}};
    Transcript odd{transcript.utterance_id, {}};
    for (std::size_t idx : order) {
        const WordHyp& w = transcript.words[idx];
        (w.stream() == Parity::even ? even : odd).words.push_back(w);
    }
    return {std::move(even), std::move(odd)};
}

// Reconstructs the overlapping layout a hypothesis corpus was produced with,
// given only the window indices and timings it carries. The utterance end is
// taken from the last word end when that lands inside the final window's
// nominal span, else the nominal end is used.
inline WindowLayout layout_from_hypotheses(const Transcript& transcript, double window_length) {
    if (window_length <= 0.0) throw ValidationError("window length must be positive");
    if (transcript.words.empty()) {
        return WindowLayout{window_length, window_length, {WindowSpec{0, 0.0, window_length}}};
    }
    std::size_t max_index = 0;
    double last_end = 0.0;
    for (const auto& w : transcript.words) {
        max_index = std::max(max_index, w.window_index);
        if (auto e = w.end()) last_end = std::max(last_end, *e);
    }
    const double half = window_length / 2.0;
    const double final_start = static_cast<double>(max_index) * half;
    // A well-formed final window is longer than L/2 (single-window layouts
    // merely need positive length); anything else falls back to length L.
    const double min_end = max_index == 0 ? 0.0 : final_start + half;
    double utterance_end = last_end;
    if (utterance_end <= min_end || utterance_end > final_start + window_length) {
        utterance_end = final_start + window_length;
    }

    WindowLayout layout{utterance_end, window_length, {}};
    for (std::size_t i = 0; i <= max_index; ++i) {
        const double start = static_cast<double>(i) * half;
        const double end = i == max_index ? utterance_end : start + window_length;
        layout.windows.push_back(WindowSpec{i, start, end - start});
    }
    return layout;
}

}  // namespace longform
