#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "longform/errors.hpp"
#include "longform/transcript.hpp"

namespace longform {

// CTM-like hypothesis format, one word per line:
//
//   <utt_id> <window_index> <start_seconds> <duration_seconds> <token> [extra...]
//
// The window column replaces the CTM channel; "-" means "no window" (used by
// reference transcripts) and maps to window 0. Lines starting with '#' or
// ';;' are comments. Fields beyond the fifth are ignored.

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        std::size_t begin = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (pos > begin) fields.push_back(line.substr(begin, pos - begin));
    }
    return fields;
}

inline bool parse_double(std::string_view text, double& out) {
    std::string buf(text);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && errno == 0 && std::isfinite(out);
}

inline bool parse_index(std::string_view text, std::size_t& out) {
    if (text.empty()) return false;
    std::size_t value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    out = value;
    return true;
}

inline bool is_comment(std::string_view line) {
    std::size_t pos = 0;
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) return true;  // blank
    if (line[pos] == '#') return true;
    return line.substr(pos).substr(0, 2) == ";;";
}

}  // namespace detail

inline std::vector<Transcript> parse_ctm(std::string_view text) {
    std::vector<Transcript> transcripts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (detail::is_comment(line)) continue;

        auto fields = detail::split_fields(line);
        if (fields.size() < 5) {
            throw ParseError(line_no, "expected at least 5 fields (utt win start dur token), got " +
                                          std::to_string(fields.size()));
        }
        WordHyp word;
        std::size_t window = 0;
        if (fields[1] != "-" && !detail::parse_index(fields[1], window)) {
            throw ParseError(line_no, "bad window index '" + std::string(fields[1]) + "'");
        }
        word.window_index = window;
        double start = 0.0;
        double duration = 0.0;
        if (!detail::parse_double(fields[2], start)) {
            throw ParseError(line_no, "bad start time '" + std::string(fields[2]) + "'");
        }
        if (!detail::parse_double(fields[3], duration)) {
            throw ParseError(line_no, "bad duration '" + std::string(fields[3]) + "'");
        }
        if (start < 0.0) throw ParseError(line_no, "negative start time");
        if (duration < 0.0) throw ParseError(line_no, "negative duration");
        word.start = start;
        word.duration = duration;
        word.token = std::string(fields[4]);

        std::string utt(fields[0]);
        if (transcripts.empty() || transcripts.back().utterance_id != utt) {
            // Reopen an earlier utterance if lines are interleaved.
            Transcript* existing = nullptr;
            for (auto& t : transcripts) {
                if (t.utterance_id == utt) {
                    existing = &t;
                    break;
                }
            }
            if (existing) {
                existing->words.push_back(std::move(word));
                continue;
            }
            transcripts.push_back(Transcript{utt, {}});
        }
        transcripts.back().words.push_back(std::move(word));
    }
    return transcripts;
}

// Seconds rendered with two decimals, round half up (1.125 -> "1.13").
inline std::string format_seconds(double seconds) {
    double centis = std::floor(seconds * 100.0 + 0.5);
    long long v = static_cast<long long>(centis);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%02lld", v / 100, v % 100);
    return buf;
}

inline std::string serialize_ctm(const std::vector<Transcript>& transcripts) {
    std::ostringstream out;
    for (const auto& t : transcripts) {
        for (const auto& w : t.words) {
            if (!w.start || !w.duration) {
                throw ValidationError("cannot serialize to CTM: word '" + w.token +
                                      "' in utterance '" + t.utterance_id +
                                      "' has no timing (use the JSONL format)");
            }
            out << t.utterance_id << ' ' << w.window_index << ' ' << format_seconds(*w.start)
                << ' ' << format_seconds(*w.duration) << ' ' << w.token << '\n';
        }
    }
    return out.str();
}

}  // namespace longform
