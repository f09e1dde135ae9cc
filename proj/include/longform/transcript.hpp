#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "longform/errors.hpp"

namespace longform {

// Window streams alternate by window index parity. Window 0 belongs to the
// even stream, window 1 to the odd stream, and so on.
enum class Parity { even, odd };

inline Parity parity_of(std::size_t window_index) {
    return (window_index % 2 == 0) ? Parity::even : Parity::odd;
}

inline const char* to_string(Parity p) {
    return p == Parity::even ? "even" : "odd";
}

// One recognized word. Timing is optional: hypotheses produced by models
// without emission times carry only token, window and order.
struct WordHyp {
    std::string token;
    std::optional<double> start;     // seconds
    std::optional<double> duration;  // seconds
    std::size_t window_index = 0;

    Parity stream() const { return parity_of(window_index); }
    std::optional<double> end() const {
        if (start && duration) return *start + *duration;
        return std::nullopt;
    }

    bool operator==(const WordHyp&) const = default;
};

struct Transcript {
    std::string utterance_id;
    std::vector<WordHyp> words;

    bool operator==(const Transcript&) const = default;
};

// Word-error-rate counts against a reference of `n_ref` words.
// `wer` is (S + D + I) / n_ref; an empty reference scored against a
// nonempty hypothesis yields the +infinity sentinel.
struct WerReport {
    std::size_t n_ref = 0;
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    double wer = 0.0;

    std::size_t total_errors() const { return substitutions + deletions + insertions; }
    double substitution_rate() const { return rate(substitutions); }
    double deletion_rate() const { return rate(deletions); }
    double insertion_rate() const { return rate(insertions); }

private:
    double rate(std::size_t count) const {
        if (n_ref == 0) {
            return count == 0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        return static_cast<double>(count) / static_cast<double>(n_ref);
    }
};

inline WerReport make_wer_report(std::size_t n_ref, std::size_t substitutions,
                                 std::size_t deletions, std::size_t insertions) {
    WerReport report;
    report.n_ref = n_ref;
    report.substitutions = substitutions;
    report.deletions = deletions;
    report.insertions = insertions;
    if (n_ref > 0) {
        report.wer = static_cast<double>(report.total_errors()) / static_cast<double>(n_ref);
    } else {
        report.wer = report.total_errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return report;
}

// Byte-wise ASCII lowercasing. Token comparison throughout the toolkit is
// exact byte equality, optionally after this normalization.
inline std::string lowercase_ascii(std::string token) {
    for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return token;
}

inline bool tokens_equal(const std::string& a, const std::string& b, bool lowercase) {
    if (!lowercase) return a == b;
    return lowercase_ascii(a) == lowercase_ascii(b);
}

}  // namespace longform
