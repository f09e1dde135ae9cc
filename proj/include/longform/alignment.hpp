#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "longform/errors.hpp"
#include "longform/transcript.hpp"

namespace longform {

// One matched position between the two parity streams. At most one side may
// be the no-prediction marker (an empty optional). When both sides are words
// their windows overlap in time, i.e. their indices differ by exactly one.
struct AlignedPair {
    std::optional<WordHyp> even;
    std::optional<WordHyp> odd;

    bool is_match() const { return even && odd; }
    bool is_gap() const { return !even || !odd; }
};

struct Alignment {
    std::string utterance_id;
    std::vector<AlignedPair> pairs;
    long cost = 0;
};

namespace detail {

// Words of adjacent windows may be matched; anything further apart is
// disallowed. Window spans step by L/2, so adjacency in index is the same
// thing as time-span overlap.
inline bool windows_adjacent(std::size_t a, std::size_t b) {
    return (a > b ? a - b : b - a) == 1;
}

inline std::vector<int> intern_tokens(const Transcript& a, const Transcript& b, bool lowercase,
                                      std::vector<int>& ids_b) {
    std::unordered_map<std::string, int> table;
    auto id_of = [&](const std::string& token) {
        std::string key = lowercase ? lowercase_ascii(token) : token;
        auto [it, _] = table.emplace(std::move(key), static_cast<int>(table.size()));
        return it->second;
    };
    std::vector<int> ids_a;
    ids_a.reserve(a.words.size());
    for (const auto& w : a.words) ids_a.push_back(id_of(w.token));
    ids_b.reserve(b.words.size());
    for (const auto& w : b.words) ids_b.push_back(id_of(w.token));
    return ids_a;
}

}  // namespace detail

// Minimum-cost monotone matching between the even and odd streams.
//
// Moves and costs: matching two words costs 0 when the tokens agree and 1
// otherwise, and is admissible only when the words' windows overlap; leaving
// a word unmatched (paired with the no-prediction marker) costs 1. Among
// equal-cost alignments the backtrace prefers a match over a gap and consumes
// the even stream before the odd one, which makes the result deterministic.
inline Alignment align_constrained(const Transcript& even_stream, const Transcript& odd_stream,
                                   bool lowercase = false) {
    for (const auto& w : even_stream.words) {
        if (w.stream() != Parity::even) {
            throw ValidationError("even stream contains word '" + w.token + "' from odd window " +
                                  std::to_string(w.window_index));
        }
    }
    for (const auto& w : odd_stream.words) {
        if (w.stream() != Parity::odd) {
            throw ValidationError("odd stream contains word '" + w.token + "' from even window " +
                                  std::to_string(w.window_index));
        }
    }

    const std::size_t m = even_stream.words.size();
    const std::size_t n = odd_stream.words.size();

    std::vector<int> odd_ids;
    std::vector<int> even_ids = detail::intern_tokens(even_stream, odd_stream, lowercase, odd_ids);
    std::vector<std::size_t> even_win(m), odd_win(n);
    for (std::size_t i = 0; i < m; ++i) even_win[i] = even_stream.words[i].window_index;
    for (std::size_t j = 0; j < n; ++j) odd_win[j] = odd_stream.words[j].window_index;

    enum Move : std::uint8_t { kNone = 0, kMatch = 1, kGapEven = 2, kGapOdd = 3 };

    // Full O(m*n) grid; cost rows are rolled, moves kept for the backtrace.
    std::vector<std::uint8_t> moves((m + 1) * (n + 1), kNone);
    std::vector<std::int32_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        prev[j] = static_cast<std::int32_t>(j);
        moves[j] = j == 0 ? kNone : kGapOdd;
    }
    for (std::size_t i = 1; i <= m; ++i) {
        std::uint8_t* move_row = moves.data() + i * (n + 1);
        cur[0] = static_cast<std::int32_t>(i);
        move_row[0] = kGapEven;
        const std::size_t wi = even_win[i - 1];
        const int ti = even_ids[i - 1];
        for (std::size_t j = 1; j <= n; ++j) {
            std::int32_t best;
            std::uint8_t mv;
            if (detail::windows_adjacent(wi, odd_win[j - 1])) {
                best = prev[j - 1] + (ti == odd_ids[j - 1] ? 0 : 1);
                mv = kMatch;
            } else {
                best = INT32_MAX;
                mv = kNone;
            }
            if (prev[j] + 1 < best) {
                best = prev[j] + 1;
                mv = kGapEven;
            }
            if (cur[j - 1] + 1 < best) {
                best = cur[j - 1] + 1;
                mv = kGapOdd;
            }
            cur[j] = best;
            move_row[j] = mv;
        }
        prev.swap(cur);
    }

    Alignment result;
    result.utterance_id = even_stream.utterance_id.empty() ? odd_stream.utterance_id
                                                           : even_stream.utterance_id;
    result.cost = prev[n];
    result.pairs.reserve(m + n);
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        switch (moves[i * (n + 1) + j]) {
            case kMatch:
                result.pairs.push_back(
                    AlignedPair{even_stream.words[i - 1], odd_stream.words[j - 1]});
                --i;
                --j;
                break;
            case kGapEven:
                result.pairs.push_back(AlignedPair{even_stream.words[i - 1], std::nullopt});
                --i;
                break;
            case kGapOdd:
                result.pairs.push_back(AlignedPair{std::nullopt, odd_stream.words[j - 1]});
                --j;
                break;
            default:
                throw ValidationError("corrupt alignment backtrace");
        }
    }
    std::reverse(result.pairs.begin(), result.pairs.end());
    return result;
}

// --- Levenshtein alignment for WER scoring ---------------------------------

enum class EditOp { hit, substitution, deletion, insertion };

struct EditStep {
    EditOp op;
    // Indices into the reference / hypothesis sequences; npos for the side an
    // insertion or deletion does not touch.
    std::size_t ref_index = npos;
    std::size_t hyp_index = npos;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct EditAlignment {
    std::vector<EditStep> steps;
    long cost = 0;
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
};

// Unit-cost edit distance with a deterministic backtrace: on equal cost a
// substitution beats an insertion, which beats a deletion.
inline EditAlignment align_levenshtein(std::span<const std::string> ref,
                                       std::span<const std::string> hyp,
                                       bool lowercase = false) {
    const std::size_t m = ref.size();
    const std::size_t n = hyp.size();

    enum Move : std::uint8_t { kNone = 0, kDiag = 1, kIns = 2, kDel = 3 };
    std::vector<std::uint8_t> moves((m + 1) * (n + 1), kNone);
    std::vector<std::int32_t> prev(n + 1), cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        prev[j] = static_cast<std::int32_t>(j);
        moves[j] = j == 0 ? kNone : kIns;
    }
    for (std::size_t i = 1; i <= m; ++i) {
        std::uint8_t* move_row = moves.data() + i * (n + 1);
        cur[0] = static_cast<std::int32_t>(i);
        move_row[0] = kDel;
        for (std::size_t j = 1; j <= n; ++j) {
            const bool equal = tokens_equal(ref[i - 1], hyp[j - 1], lowercase);
            std::int32_t best = prev[j - 1] + (equal ? 0 : 1);
            std::uint8_t mv = kDiag;
            if (cur[j - 1] + 1 < best) {
                best = cur[j - 1] + 1;
                mv = kIns;
            }
            if (prev[j] + 1 < best) {
                best = prev[j] + 1;
                mv = kDel;
            }
            cur[j] = best;
            move_row[j] = mv;
        }
        prev.swap(cur);
    }

    EditAlignment result;
    result.cost = prev[n];
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        switch (moves[i * (n + 1) + j]) {
            case kDiag: {
                const bool equal = tokens_equal(ref[i - 1], hyp[j - 1], lowercase);
                result.steps.push_back(
                    EditStep{equal ? EditOp::hit : EditOp::substitution, i - 1, j - 1});
                if (!equal) ++result.substitutions;
                --i;
                --j;
                break;
            }
            case kIns:
                result.steps.push_back(EditStep{EditOp::insertion, EditStep::npos, j - 1});
                ++result.insertions;
                --j;
                break;
            case kDel:
                result.steps.push_back(EditStep{EditOp::deletion, i - 1, EditStep::npos});
                ++result.deletions;
                --i;
                break;
            default:
                throw ValidationError("corrupt edit backtrace");
        }
    }
    std::reverse(result.steps.begin(), result.steps.end());
    return result;
}

inline WerReport score_wer(std::span<const std::string> ref, std::span<const std::string> hyp,
                           bool lowercase = false) {
    EditAlignment a = align_levenshtein(ref, hyp, lowercase);
    return make_wer_report(ref.size(), a.substitutions, a.deletions, a.insertions);
}

inline std::vector<std::string> tokens_of(const Transcript& transcript) {
    std::vector<std::string> tokens;
    tokens.reserve(transcript.words.size());
    for (const auto& w : transcript.words) tokens.push_back(w.token);
    return tokens;
}

}  // namespace longform
