// longform: windowed decoding, consensus merging, WER scoring, attention
// kernels and the segmentation-versus-overlap simulator behind one CLI.
//
// Exit codes: 0 success, 1 processing error, 2 usage error.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "longform/longform.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProcessing = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw longform::Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw longform::Error("cannot open '" + path + "' for writing");
    out << content;
}

unsigned thread_budget() {
    const char* env = std::getenv("LONGFORM_THREADS");
    if (!env) return 1;
    const long value = std::strtol(env, nullptr, 10);
    if (value < 1) return 1;
    return static_cast<unsigned>(value);
}

void lowercase_corpus(std::vector<longform::Transcript>& transcripts) {
    for (auto& t : transcripts) {
        for (auto& w : t.words) w.token = longform::lowercase_ascii(w.token);
    }
}

struct SimFlags {
    double L = 16.0;
    std::string overlap_mode = "overlap";
    std::uint64_t seed = 0;
    double base_error_rate = 0.05;
    double warmup_seconds = 1.0;
    double warmup_multiplier = 3.0;
    double cut_drop_prob = 0.5;
    double mix_sub = 0.5;
    double mix_del = 0.3;
    double mix_ins = 0.2;
    std::string ref_path;
    double synth_seconds = 0.0;
    std::uint64_t synth_seed = 1;

    longform::CorruptionConfig config() const {
        longform::CorruptionConfig c;
        c.seed = seed;
        c.base_error_rate = base_error_rate;
        c.warmup_seconds = warmup_seconds;
        c.warmup_multiplier = warmup_multiplier;
        c.boundary_cut_drop_prob = cut_drop_prob;
        c.substitute_prob = mix_sub;
        c.delete_prob = mix_del;
        c.insert_prob = mix_ins;
        return c;
    }

    std::vector<longform::Transcript> references() const {
        if (!ref_path.empty()) return longform::parse_transcripts(read_file(ref_path));
        if (synth_seconds > 0.0) {
            return {longform::make_synthetic_reference(synth_seed, synth_seconds)};
        }
        throw longform::Error("no reference: pass --ref FILE or --synth-seconds N");
    }
};

void add_sim_flags(CLI::App* cmd, SimFlags& flags, bool with_trials, std::size_t* trials) {
    cmd->add_option("--ref", flags.ref_path, "reference transcript (CTM, window column '-')");
    cmd->add_option("--synth-seconds", flags.synth_seconds,
                    "generate a synthetic reference of this length instead of --ref")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--synth-seed", flags.synth_seed, "seed for the synthetic reference");
    cmd->add_option("--L", flags.L, "window length in seconds")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "corruption seed");
    cmd->add_option("--base-error-rate", flags.base_error_rate)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--warmup-seconds", flags.warmup_seconds)->check(CLI::NonNegativeNumber);
    cmd->add_option("--warmup-multiplier", flags.warmup_multiplier)->check(CLI::Range(1.0, 1e9));
    cmd->add_option("--cut-drop-prob", flags.cut_drop_prob)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mix-sub", flags.mix_sub)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mix-del", flags.mix_del)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mix-ins", flags.mix_ins)->check(CLI::Range(0.0, 1.0));
    if (with_trials) cmd->add_option("--trials", *trials, "number of seeded trials");
}

longform::ConfidenceMode parse_mode(const std::string& name) {
    return name == "position" ? longform::ConfidenceMode::position_based
                              : longform::ConfidenceMode::time_based;
}

// --- subcommands -------------------------------------------------------------

int run_segment(double len, double L, const std::string& mode, bool as_json,
                const std::string& out_path) {
    const longform::WindowLayout layout = mode == "fixed" ? longform::layout_fixed(len, L)
                                                          : longform::layout_overlapping(len, L);
    std::ostringstream out;
    if (as_json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& w : layout.windows) {
            j.push_back({{"index", w.index}, {"start", w.start}, {"end", w.end()}});
        }
        out << j.dump() << '\n';
    } else {
        for (const auto& w : layout.windows) {
            out << w.index << ' ' << longform::format_seconds(w.start) << ' '
                << longform::format_seconds(w.end()) << '\n';
        }
    }
    write_file(out_path, out.str());
    return kExitOk;
}

int run_merge(const std::string& in_path, const std::string& out_path, const std::string& mode,
              double L, bool lowercase) {
    const std::string text = read_file(in_path);
    std::vector<longform::Transcript> corpus = longform::parse_transcripts(text);
    const bool jsonl_output = !corpus.empty() && !text.empty() && text.find_first_not_of(" \t\r\n") !=
                                  std::string::npos &&
                              text[text.find_first_not_of(" \t\r\n")] == '{';
    if (lowercase) lowercase_corpus(corpus);
    const longform::ConfidenceMode confidence = parse_mode(mode);

    struct UttResult {
        longform::Transcript merged;
        longform::MergeDiagnostics diagnostics;
        std::string error;
    };
    std::vector<UttResult> results(corpus.size());
    auto process = [&](std::size_t u) {
        try {
            const longform::WindowLayout layout = longform::layout_from_hypotheses(corpus[u], L);
            longform::MergeResult merged = longform::merge_pipeline(corpus[u], layout, confidence);
            results[u].merged = std::move(merged.transcript);
            results[u].diagnostics = merged.diagnostics;
        } catch (const longform::Error& e) {
            results[u].error = e.what();
        }
    };

    const unsigned threads = std::min<unsigned>(thread_budget(), std::max<std::size_t>(corpus.size(), 1));
    if (threads <= 1) {
        for (std::size_t u = 0; u < corpus.size(); ++u) process(u);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t u = next.fetch_add(1); u < corpus.size(); u = next.fetch_add(1)) {
                    process(u);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Output order is input order regardless of the thread budget.
    std::vector<longform::Transcript> merged_corpus;
    bool failed = false;
    for (std::size_t u = 0; u < corpus.size(); ++u) {
        if (!results[u].error.empty()) {
            failed = true;
            nlohmann::ordered_json line{{"utt", corpus[u].utterance_id},
                                        {"error", results[u].error}};
            std::cerr << line.dump() << '\n';
            continue;
        }
        merged_corpus.push_back(results[u].merged);
        nlohmann::ordered_json line{{"utt", corpus[u].utterance_id}};
        line.update(longform::to_json(results[u].diagnostics));
        std::cerr << line.dump() << '\n';
    }
    write_file(out_path, jsonl_output ? longform::serialize_jsonl(merged_corpus)
                                      : longform::serialize_ctm(merged_corpus));
    return failed ? kExitProcessing : kExitOk;
}

int run_wer(const std::string& ref_path, const std::string& hyp_path, bool lowercase,
            bool as_json) {
    std::vector<longform::Transcript> refs = longform::parse_transcripts(read_file(ref_path));
    std::vector<longform::Transcript> hyps = longform::parse_transcripts(read_file(hyp_path));

    auto tokens_by_utt = [&](const std::vector<longform::Transcript>& ts,
                             const std::string& utt) -> std::vector<std::string> {
        for (const auto& t : ts) {
            if (t.utterance_id == utt) return longform::tokens_of(t);
        }
        return {};
    };
    std::vector<std::string> utt_order;
    for (const auto& t : refs) utt_order.push_back(t.utterance_id);
    for (const auto& t : hyps) {
        if (tokens_by_utt(refs, t.utterance_id).empty() &&
            std::find(utt_order.begin(), utt_order.end(), t.utterance_id) == utt_order.end()) {
            utt_order.push_back(t.utterance_id);
        }
    }

    std::size_t n = 0, subs = 0, dels = 0, inss = 0;
    std::vector<std::pair<std::string, longform::WerReport>> per_utt;
    for (const auto& utt : utt_order) {
        const auto r = tokens_by_utt(refs, utt);
        const auto h = tokens_by_utt(hyps, utt);
        const longform::WerReport report = longform::score_wer(r, h, lowercase);
        n += report.n_ref;
        subs += report.substitutions;
        dels += report.deletions;
        inss += report.insertions;
        per_utt.emplace_back(utt, report);
    }
    const longform::WerReport overall = longform::make_wer_report(n, subs, dels, inss);

    if (as_json) {
        nlohmann::ordered_json j = longform::to_json(overall);
        auto& utts = j["utterances"] = nlohmann::ordered_json::array();
        for (const auto& [utt, report] : per_utt) {
            nlohmann::ordered_json entry{{"utt", utt}};
            entry.update(longform::to_json(report));
            utts.push_back(std::move(entry));
        }
        std::cout << j.dump() << '\n';
        return kExitOk;
    }

    char line[160];
    std::snprintf(line, sizeof(line), "%-16s %8s %8s %8s %8s %10s\n", "utterance", "N", "D", "S",
                  "I", "WER%");
    std::cout << line;
    auto print_row = [&](const std::string& name, const longform::WerReport& r) {
        if (std::isfinite(r.wer)) {
            std::snprintf(line, sizeof(line), "%-16s %8zu %8zu %8zu %8zu %10.2f\n", name.c_str(),
                          r.n_ref, r.deletions, r.substitutions, r.insertions, 100.0 * r.wer);
        } else {
            std::snprintf(line, sizeof(line), "%-16s %8zu %8zu %8zu %8zu %10s\n", name.c_str(),
                          r.n_ref, r.deletions, r.substitutions, r.insertions, "inf");
        }
        std::cout << line;
    };
    for (const auto& [utt, report] : per_utt) print_row(utt, report);
    print_row("OVERALL", overall);
    // Error decomposition as percentages of the reference length; deletions
    // first, since long-form failures are deletion-dominated.
    if (overall.n_ref > 0) {
        std::snprintf(line, sizeof(line),
                      "breakdown: %.1f%% deletions, %.1f%% insertions, %.1f%% substitutions\n",
                      100.0 * overall.deletion_rate(), 100.0 * overall.insertion_rate(),
                      100.0 * overall.substitution_rate());
        std::cout << line;
    }
    return kExitOk;
}

int run_simulate(const SimFlags& flags, const std::string& out_path) {
    const auto refs = flags.references();
    const auto kind = flags.overlap_mode == "fixed" ? longform::LayoutKind::fixed
                                                    : longform::LayoutKind::overlapping;
    const auto corpus = longform::simulate_corpus(refs, kind, flags.L, flags.config());
    std::vector<longform::Transcript> flat;
    flat.reserve(corpus.size());
    for (const auto& utt : corpus) flat.push_back(utt.combined());
    write_file(out_path, longform::serialize_ctm(flat));
    return kExitOk;
}

int run_study(const SimFlags& flags, std::size_t trials, const std::string& mode,
              const std::string& out_path) {
    const auto refs = flags.references();
    const longform::StudyReport report =
        longform::study(refs, flags.L, flags.config(), trials, parse_mode(mode));
    write_file(out_path, longform::to_json(report).dump(2) + "\n");
    return kExitOk;
}

int run_attn(const std::string& spec_path) {
    const nlohmann::json spec = nlohmann::json::parse(read_file(spec_path), nullptr, false);
    if (spec.is_discarded() || !spec.is_object() || !spec.contains("kernel")) {
        std::cerr << "attn: spec must be a JSON object with a 'kernel' field\n";
        return kExitUsage;
    }
    const std::string kernel = spec["kernel"].get<std::string>();
    const nlohmann::json params = spec.value("params", nlohmann::json::object());
    auto vec = [&](const char* key) { return params.at(key).get<std::vector<double>>(); };

    nlohmann::ordered_json out;
    if (kernel == "soft") {
        out["weights"] = longform::soft_attention(vec("energies"));
    } else if (kernel == "monotonic_select") {
        const auto selected =
            longform::monotonic_select(vec("p"), params.value("start", std::size_t{0}));
        if (selected) {
            out["selected"] = *selected;
        } else {
            out["selected"] = nullptr;  // scanned off the end of the sequence
        }
    } else if (kernel == "expected") {
        const auto p = params.at("p").get<std::vector<std::vector<double>>>();
        const std::size_t steps = params.value("steps", p.size());
        const auto alphas = longform::monotonic_expected(p, steps);
        out["weights"] = alphas;
        auto& deficits = out["deficits"] = nlohmann::ordered_json::array();
        for (const auto& alpha : alphas) {
            double sum = 0.0;
            for (double a : alpha) sum += a;
            deficits.push_back(1.0 - sum);
        }
    } else if (kernel == "mocha") {
        out["weights"] = longform::mocha_weights(vec("energies"), params.at("t").get<std::size_t>(),
                                                 params.at("w").get<std::size_t>());
    } else if (kernel == "milk") {
        out["weights"] =
            longform::milk_weights(vec("energies"), params.at("t").get<std::size_t>());
    } else if (kernel == "gmm") {
        longform::GmmParams gmm;
        gmm.weight_logits = vec("gamma");
        gmm.log_variances = vec("beta");
        gmm.log_steps = vec("kappa");
        gmm.prev_means = vec("mu_prev");
        const auto result = longform::gmm_weights(gmm, spec.at("T").get<std::size_t>());
        out["weights"] = result.weights;
        out["new_means"] = result.means;
    } else if (kernel == "latency") {
        out["loss"] = longform::latency_loss(vec("alpha_prev"), vec("alpha_cur"));
    } else {
        std::cerr << "attn: unknown kernel '" << kernel << "'\n";
        return kExitUsage;
    }
    std::cout << out.dump() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-form decoding toolkit: overlapping inference, WER scoring, "
                 "attention kernels and a seeded recognizer simulator"};
    app.require_subcommand(1);

    // segment
    auto* segment = app.add_subcommand("segment", "print a window layout");
    double seg_len = 0.0, seg_L = 16.0;
    std::string seg_mode = "overlap", seg_out;
    bool seg_json = false;
    segment->add_option("--len", seg_len, "utterance length in seconds")
        ->required()
        ->check(CLI::PositiveNumber);
    segment->add_option("--L", seg_L, "window length in seconds")->check(CLI::PositiveNumber);
    segment->add_option("--mode,--overlap-mode", seg_mode, "overlap | fixed")
        ->check(CLI::IsMember({"overlap", "fixed"}));
    segment->add_flag("--json", seg_json, "emit JSON instead of text");
    segment->add_option("--out", seg_out, "output path (default stdout)");

    // merge
    auto* merge = app.add_subcommand("merge", "merge an overlapping-window corpus");
    std::string merge_in, merge_out, merge_mode = "time";
    double merge_L = 16.0;
    bool merge_lower = false;
    merge->add_option("input", merge_in, "windowed hypothesis corpus (CTM or JSONL, '-' = stdin)")
        ->required();
    merge->add_option("--out", merge_out, "merged output path (default stdout)");
    merge->add_option("--confidence", merge_mode, "time | position")
        ->check(CLI::IsMember({"time", "position"}));
    merge->add_option("--L", merge_L, "window length used to produce the corpus")
        ->check(CLI::PositiveNumber);
    merge->add_flag("--lowercase", merge_lower, "lowercase tokens before comparison");

    // wer
    auto* wer = app.add_subcommand("wer", "score a hypothesis against a reference");
    std::string wer_ref, wer_hyp;
    bool wer_lower = false, wer_json = false;
    wer->add_option("--ref", wer_ref, "reference transcripts")->required();
    wer->add_option("--hyp", wer_hyp, "hypothesis transcripts")->required();
    wer->add_flag("--lowercase", wer_lower, "lowercase tokens before comparison");
    wer->add_flag("--json", wer_json, "emit the report as JSON only");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the synthetic recognizer over windows");
    SimFlags sim_flags;
    std::string sim_out, sim_mode_out;
    simulate->add_option("--overlap-mode", sim_flags.overlap_mode, "overlap | fixed")
        ->check(CLI::IsMember({"overlap", "fixed"}));
    add_sim_flags(simulate, sim_flags, false, nullptr);
    simulate->add_option("--out", sim_out, "output corpus path (default stdout)");

    // study
    auto* study_cmd = app.add_subcommand("study", "compare fixed segmentation with overlapping inference");
    SimFlags study_flags;
    std::size_t study_trials = 100;
    std::string study_out, study_mode = "time";
    add_sim_flags(study_cmd, study_flags, true, &study_trials);
    study_cmd->add_option("--confidence", study_mode, "time | position")
        ->check(CLI::IsMember({"time", "position"}));
    study_cmd->add_option("--out", study_out, "report path (default stdout)");

    // attn
    auto* attn = app.add_subcommand("attn", "evaluate an attention kernel from a JSON spec");
    std::string attn_spec;
    attn->add_option("spec", attn_spec, "JSON spec file ('-' = stdin)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (segment->parsed()) return run_segment(seg_len, seg_L, seg_mode, seg_json, seg_out);
        if (merge->parsed()) return run_merge(merge_in, merge_out, merge_mode, merge_L, merge_lower);
        if (wer->parsed()) return run_wer(wer_ref, wer_hyp, wer_lower, wer_json);
        if (simulate->parsed()) return run_simulate(sim_flags, sim_out);
        if (study_cmd->parsed()) return run_study(study_flags, study_trials, study_mode, study_out);
        if (attn->parsed()) return run_attn(attn_spec);
    } catch (const longform::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProcessing;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProcessing;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProcessing;
    }
    return kExitOk;
}
