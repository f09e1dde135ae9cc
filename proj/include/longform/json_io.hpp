#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "longform/consensus.hpp"
#include "longform/ctm.hpp"
#include "longform/errors.hpp"
#include "longform/simulate.hpp"
#include "longform/transcript.hpp"

namespace longform {

// JSON-lines transcript format, one Transcript per line:
//
//   {"utt": "u1", "words": [{"win": 0, "i": 1, "token": "hello",
//                            "start": 0.0, "dur": 0.4}, ...]}
//
// "i" is the word's 1-based position within its window; "start" and "dur"
// are optional, which makes this the format of choice for timing-free
// attention-model hypotheses.

inline std::vector<Transcript> parse_jsonl(std::string_view text) {
    std::vector<Transcript> transcripts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t') {
                blank = false;
                break;
            }
        }
        if (blank) continue;

        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw ParseError(line_no, "not a JSON object");
        }
        if (!record.contains("utt") || !record["utt"].is_string()) {
            throw ParseError(line_no, "missing string field 'utt'");
        }
        Transcript transcript{record["utt"].get<std::string>(), {}};
        if (!record.contains("words") || !record["words"].is_array()) {
            throw ParseError(line_no, "missing array field 'words'");
        }
        for (const auto& entry : record["words"]) {
            if (!entry.is_object() || !entry.contains("token") || !entry.contains("win")) {
                throw ParseError(line_no, "word entries need at least 'win' and 'token'");
            }
            WordHyp word;
            word.token = entry["token"].get<std::string>();
            if (word.token.empty() || word.token.find_first_of(" \t\n") != std::string::npos) {
                throw ParseError(line_no, "tokens must be nonempty and whitespace-free");
            }
            if (!entry["win"].is_number_unsigned()) {
                throw ParseError(line_no, "'win' must be a nonnegative integer");
            }
            word.window_index = entry["win"].get<std::size_t>();
            if (entry.contains("start")) {
                const double s = entry["start"].get<double>();
                if (s < 0.0) throw ParseError(line_no, "negative start time");
                word.start = s;
            }
            if (entry.contains("dur")) {
                const double d = entry["dur"].get<double>();
                if (d < 0.0) throw ParseError(line_no, "negative duration");
                word.duration = d;
            }
            transcript.words.push_back(std::move(word));
        }
        transcripts.push_back(std::move(transcript));
    }
    return transcripts;
}

inline std::string serialize_jsonl(const std::vector<Transcript>& transcripts) {
    std::string out;
    for (const auto& t : transcripts) {
        nlohmann::ordered_json record;
        record["utt"] = t.utterance_id;
        auto& words = record["words"] = nlohmann::ordered_json::array();
        std::unordered_map<std::size_t, std::size_t> rank;
        for (const auto& w : t.words) {
            nlohmann::ordered_json entry;
            entry["win"] = w.window_index;
            entry["i"] = ++rank[w.window_index];
            entry["token"] = w.token;
            if (w.start) entry["start"] = *w.start;
            if (w.duration) entry["dur"] = *w.duration;
            words.push_back(std::move(entry));
        }
        out += record.dump();
        out += '\n';
    }
    return out;
}

// Accepts either format: a document whose first non-blank character is '{'
// is JSONL, anything else is CTM.
inline std::vector<Transcript> parse_transcripts(std::string_view text) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (c == '{') return parse_jsonl(text);
        break;
    }
    return parse_ctm(text);
}

inline nlohmann::ordered_json to_json(const MergeDiagnostics& d) {
    return {{"pairs", d.pairs},
            {"agreements", d.agreements},
            {"conflicts_won_even", d.conflicts_won_even},
            {"conflicts_won_odd", d.conflicts_won_odd},
            {"null_wins", d.null_wins}};
}

inline nlohmann::ordered_json to_json(const WerReport& r) {
    nlohmann::ordered_json j{{"n_ref", r.n_ref},
                             {"substitutions", r.substitutions},
                             {"deletions", r.deletions},
                             {"insertions", r.insertions}};
    // JSON has no infinity; an empty-reference WER is emitted as null.
    if (std::isfinite(r.wer)) {
        j["wer"] = r.wer;
    } else {
        j["wer"] = nullptr;
    }
    return j;
}

inline nlohmann::ordered_json to_json(const StudyReport& report) {
    nlohmann::ordered_json j;
    j["window_length"] = report.window_length;
    j["base_seed"] = report.base_seed;
    j["num_trials"] = report.trials.size();
    j["mean_fixed_wer"] = report.mean_fixed_wer;
    j["mean_overlapping_wer"] = report.mean_overlapping_wer;
    j["relative_reduction"] = report.relative_reduction;
    j["overlapping_wins"] = report.overlapping_wins;
    j["overlapping_losses"] = report.overlapping_losses;
    j["ties"] = report.ties;
    j["fixed_totals"] = to_json(report.fixed_totals);
    j["overlapping_totals"] = to_json(report.overlapping_totals);
    auto& trials = j["trials"] = nlohmann::ordered_json::array();
    for (const auto& t : report.trials) {
        trials.push_back(nlohmann::ordered_json{
            {"seed", t.seed}, {"fixed", to_json(t.fixed)}, {"overlapping", to_json(t.overlapping)}});
    }
    return j;
}

}  // namespace longform
