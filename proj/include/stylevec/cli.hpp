#pragma once

// Command-line surface. Every subcommand is deterministic given identical
// flags, files, and --seed. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 numeric/internal failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stylevec/analysis.hpp"
#include "stylevec/errors.hpp"
#include "stylevec/extract.hpp"
#include "stylevec/metrics.hpp"
#include "stylevec/model.hpp"
#include "stylevec/serialize.hpp"
#include "stylevec/steer.hpp"
#include "stylevec/store.hpp"

namespace stylevec::cli {

namespace detail {

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw IoError("write failed for " + path.string());
}

/// --model accepts a checkpoint path or "seeded:key=value,..." with keys
/// layers, dim, heads, ff, vocab, seq (missing keys keep their defaults).
inline Model load_model(const std::string& spec, uint64_t seed) {
    if (!spec.starts_with("seeded:")) return Model::load(spec);
    ModelConfig cfg;
    cfg.seed = seed;
    std::string rest = spec.substr(7);
    size_t pos = 0;
    while (pos < rest.size()) {
        const size_t comma = rest.find(',', pos);
        const std::string kv =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? rest.size() : comma + 1;
        if (kv.empty()) continue;
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("bad seeded model spec near '" + kv + "' (want key=value)");
        const std::string key = kv.substr(0, eq);
        int value = 0;
        try {
            value = std::stoi(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("bad integer in seeded model spec: '" + kv + "'");
        }
        if (key == "layers") cfg.n_layers = value;
        else if (key == "dim") cfg.d_model = value;
        else if (key == "heads") cfg.n_heads = value;
        else if (key == "ff") cfg.d_ff = value;
        else if (key == "vocab") cfg.vocab_size = value;
        else if (key == "seq") cfg.max_seq_len = value;
        else throw UsageError("unknown seeded model key '" + key + "'");
    }
    return Model(cfg);
}

inline std::vector<int> parse_int_list(const std::vector<std::string>& raw,
                                       const char* flag) {
    std::vector<int> out;
    for (const auto& tok : raw) {
        size_t pos = 0;
        while (pos <= tok.size()) {
            const size_t comma = tok.find(',', pos);
            const std::string piece =
                tok.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pos = comma == std::string::npos ? tok.size() + 1 : comma + 1;
            if (piece.empty()) continue;
            try {
                out.push_back(std::stoi(piece));
            } catch (const std::exception&) {
                throw UsageError(std::string("bad integer '") + piece + "' in " + flag);
            }
        }
    }
    return out;
}

inline std::vector<float> parse_float_list(const std::vector<std::string>& raw,
                                           const char* flag) {
    std::vector<float> out;
    for (const auto& tok : raw) {
        size_t pos = 0;
        while (pos <= tok.size()) {
            const size_t comma = tok.find(',', pos);
            const std::string piece =
                tok.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            pos = comma == std::string::npos ? tok.size() + 1 : comma + 1;
            if (piece.empty()) continue;
            try {
                out.push_back(std::stof(piece));
            } catch (const std::exception&) {
                throw UsageError(std::string("bad number '") + piece + "' in " + flag);
            }
        }
    }
    return out;
}

/// Users in first-seen order.
inline std::vector<std::string> users_in(const Dataset& ds) {
    std::vector<std::string> users;
    std::set<std::string> seen;
    for (const auto& r : ds.records)
        if (seen.insert(r.user_id).second) users.push_back(r.user_id);
    return users;
}

/// A user's history: the first record carrying it (LaMP-style files repeat
/// the full history on every record of a user).
inline const DatasetRecord& record_for(const Dataset& ds, const std::string& user) {
    for (const auto& r : ds.records)
        if (r.user_id == user) return r;
    throw DataError("user '" + user + "' not found in dataset");
}

/// Fills missing neutrals, reports skips, and drops pairs that still lack
/// one so downstream stages see a clean history.
inline std::vector<HistoryPair> neutral_ready(const Model& model,
                                              std::vector<HistoryPair> pairs,
                                              int max_new, std::ostream& diag) {
    NeutralResult nr = gen_neutral(model, std::move(pairs), max_new);
    for (const auto& s : nr.skipped)
        diag << "warning: pair " << s.index << " skipped: " << s.reason << "\n";
    std::vector<HistoryPair> ready;
    for (auto& p : nr.pairs)
        if (p.neutral) ready.push_back(std::move(p));
    if (ready.empty()) throw DataError("no history pairs usable after neutral generation");
    return ready;
}

inline nlohmann::json record_json(const DatasetRecord& rec) {
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& p : rec.history) {
        nlohmann::json h{{"input", p.input}, {"output", p.output}};
        if (p.neutral) h["neutral"] = *p.neutral;
        hist.push_back(std::move(h));
    }
    nlohmann::json j{{"user_id", rec.user_id}, {"history", hist}, {"query", rec.query}};
    if (!rec.reference.empty()) j["reference"] = rec.reference;
    return j;
}

struct CommonFlags {
    std::string model;
    std::string data;
    std::string out;
    std::string csv;
    uint64_t seed = 42;
    int jobs = 1;
    int max_new = 64;
};

inline void add_model_flag(CLI::App* sub, CommonFlags& f, bool required = true) {
    auto* opt = sub->add_option("--model", f.model,
                                "checkpoint path or seeded:layers=..,dim=..");
    if (required) opt->required();
}

inline void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--seed", f.seed, "RNG seed (splits, inits)")->capture_default_str();
    sub->add_option("--jobs", f.jobs, "concurrent forward passes")->capture_default_str();
}

inline double marker_rate(const std::vector<std::string>& outputs,
                          const std::string& marker) {
    if (outputs.empty()) return 0.0;
    size_t hits = 0;
    for (const auto& o : outputs)
        if (o.find(marker) != std::string::npos) ++hits;
    return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

} // namespace detail

/// Parses and executes one invocation; never calls exit().
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& diag = std::cerr) {
    using namespace detail;
    CLI::App app{"style-vector personalization pipeline"};
    app.require_subcommand(1);

    CommonFlags f;

    // --- gen-neutral --------------------------------------------------------
    auto* sub_gn = app.add_subcommand(
        "gen-neutral", "fill style-agnostic completions for every history pair");
    std::string gn_user;
    add_model_flag(sub_gn, f);
    sub_gn->add_option("--data", f.data, "input JSONL dataset")->required();
    sub_gn->add_option("--out", f.out, "output JSONL path")->required();
    sub_gn->add_option("--user", gn_user, "only this user's records");
    sub_gn->add_option("--max-new", f.max_new, "generation budget per neutral")
        ->capture_default_str();
    add_common(sub_gn, f);
    sub_gn->callback([&] {
        const Model model = load_model(f.model, f.seed);
        Dataset ds = load_dataset(f.data);
        for (const auto& issue : ds.issues)
            diag << "warning: line " << issue.line << " skipped: " << issue.reason << "\n";
        std::ostringstream lines;
        for (auto& rec : ds.records) {
            if (!gn_user.empty() && rec.user_id != gn_user) {
                lines << record_json(rec).dump() << "\n";
                continue;
            }
            NeutralResult nr = gen_neutral(model, std::move(rec.history), f.max_new);
            for (const auto& s : nr.skipped)
                diag << "warning: user " << rec.user_id << " pair " << s.index
                     << " skipped: " << s.reason << "\n";
            rec.history = std::move(nr.pairs);
            lines << record_json(rec).dump() << "\n";
        }
        write_file(f.out, lines.str());
        out << "wrote " << ds.records.size() << " records to " << f.out << "\n";
    });

    // --- extract -------------------------------------------------------------
    auto* sub_ex = app.add_subcommand(
        "extract", "derive style vectors from user histories");
    std::string ex_user, ex_method = "meandiff";
    int ex_layer = -1;
    add_model_flag(sub_ex, f);
    sub_ex->add_option("--data", f.data, "JSONL dataset")->required();
    sub_ex->add_option("--out", f.out, "output directory for <user>.svec files")
        ->required();
    sub_ex->add_option("--user", ex_user, "only this user (default: all)");
    sub_ex->add_option("--layer", ex_layer, "capture layer (default: 2L/3)");
    sub_ex->add_option("--method", ex_method, "meandiff|logreg|pca")
        ->capture_default_str();
    sub_ex->add_option("--max-new", f.max_new, "budget for missing neutrals")
        ->capture_default_str();
    add_common(sub_ex, f);
    sub_ex->callback([&] {
        const Model model = load_model(f.model, f.seed);
        const ExtractMethod method = parse_method(ex_method);
        const int layer =
            ex_layer >= 0 ? ex_layer : default_intervention(model.config()).layer;
        Dataset ds = load_dataset(f.data);
        std::vector<std::string> users =
            ex_user.empty() ? users_in(ds) : std::vector<std::string>{ex_user};
        std::filesystem::create_directories(f.out);
        for (const auto& user : users) {
            const DatasetRecord& rec = record_for(ds, user);
            const auto pairs = neutral_ready(model, rec.history, f.max_new, diag);
            ActivationResult ar = collect_activations(model, pairs, layer, f.jobs);
            for (const auto& s : ar.skipped)
                diag << "warning: user " << user << " pair " << s.index
                     << " skipped: " << s.reason << "\n";
            const StyleVector sv = extract_style(ar.acts, method, user);
            const auto path = std::filesystem::path(f.out) / (user + ".svec");
            save_vector(sv, path);
            out << json_of(sv).dump() << "\n";
        }
    });

    // --- steer ----------------------------------------------------------------
    auto* sub_st = app.add_subcommand("steer", "steered greedy completion");
    std::string st_vector, st_prompt, st_positions = "generated";
    int st_layer = -1;
    float st_alpha = 2.0f;
    add_model_flag(sub_st, f);
    sub_st->add_option("--vector", st_vector, "style vector (.svec)")->required();
    sub_st->add_option("--prompt", st_prompt, "input text to complete")->required();
    sub_st->add_option("--layer", st_layer, "intervention layer (default: vector's)");
    sub_st->add_option("--alpha", st_alpha, "intervention strength")
        ->capture_default_str();
    sub_st->add_option("--positions", st_positions, "all-input|last-input|generated")
        ->capture_default_str();
    sub_st->add_option("--max-new", f.max_new, "generation budget")
        ->capture_default_str();
    sub_st->add_option("--out", f.out, "write the completion here instead of stdout");
    add_common(sub_st, f);
    sub_st->callback([&] {
        const Model model = load_model(f.model, f.seed);
        const StyleVector sv = load_vector(st_vector);
        InterventionConfig cfg;
        cfg.layer = st_layer >= 0 ? st_layer : sv.layer;
        cfg.alpha = st_alpha;
        cfg.positions = parse_positions(st_positions);
        const std::string text =
            steer_generate(model, sv, cfg, st_prompt, f.max_new, &diag);
        if (f.out.empty()) out << text << "\n";
        else write_file(f.out, text);
    });

    // --- probe ------------------------------------------------------------------
    auto* sub_pr = app.add_subcommand(
        "probe", "layer-wise linear probing of authentic vs neutral activations");
    std::string pr_user;
    std::vector<std::string> pr_layers;
    double pr_test_fraction = 0.2;
    add_model_flag(sub_pr, f);
    sub_pr->add_option("--data", f.data, "JSONL dataset")->required();
    sub_pr->add_option("--user", pr_user, "only this user's pairs (default: pool all)");
    sub_pr->add_option("--layers", pr_layers, "layers to probe (default: all)");
    sub_pr->add_option("--test-fraction", pr_test_fraction, "held-out fraction")
        ->capture_default_str();
    sub_pr->add_option("--max-new", f.max_new, "budget for missing neutrals")
        ->capture_default_str();
    sub_pr->add_option("--out", f.out, "JSON report path");
    sub_pr->add_option("--csv", f.csv, "CSV series path (layer,auc)");
    add_common(sub_pr, f);
    sub_pr->callback([&] {
        const Model model = load_model(f.model, f.seed);
        Dataset ds = load_dataset(f.data);
        std::vector<HistoryPair> pairs;
        for (const auto& user : users_in(ds)) {
            if (!pr_user.empty() && user != pr_user) continue;
            const auto& rec = record_for(ds, user);
            pairs.insert(pairs.end(), rec.history.begin(), rec.history.end());
        }
        if (pairs.empty()) throw DataError("no history pairs selected");
        pairs = neutral_ready(model, std::move(pairs), f.max_new, diag);
        std::vector<int> layers = parse_int_list(pr_layers, "--layers");
        if (layers.empty())
            for (int l = 0; l < model.config().n_layers; ++l) layers.push_back(l);
        const ProbeReport rep =
            probe_layers(model, pairs, layers, pr_test_fraction, f.seed);
        out << text_of(rep);
        if (!f.out.empty()) write_file(f.out, json_of(rep).dump(2) + "\n");
        if (!f.csv.empty()) write_file(f.csv, csv_of(rep));
    });

    // --- sweep ---------------------------------------------------------------
    auto* sub_sw = app.add_subcommand(
        "sweep", "grid search over intervention layer and strength");
    std::string sw_vectors, sw_metric = "rouge-l", sw_positions = "generated";
    std::vector<std::string> sw_layers, sw_alphas;
    add_model_flag(sub_sw, f);
    sub_sw->add_option("--data", f.data, "validation JSONL (references required)")
        ->required();
    sub_sw->add_option("--vectors", sw_vectors, "directory of <user>.svec files")
        ->required();
    sub_sw->add_option("--layers", sw_layers, "layer grid")->required();
    sub_sw->add_option("--alphas", sw_alphas, "alpha grid")->required();
    sub_sw->add_option("--metric", sw_metric, "rouge-l|meteor-lite")
        ->capture_default_str();
    sub_sw->add_option("--positions", sw_positions, "all-input|last-input|generated")
        ->capture_default_str();
    sub_sw->add_option("--max-new", f.max_new, "generation budget")
        ->capture_default_str();
    sub_sw->add_option("--out", f.out, "JSON report path");
    sub_sw->add_option("--csv", f.csv, "CSV series path (layer,alpha,score)");
    add_common(sub_sw, f);
    sub_sw->callback([&] {
        const Model model = load_model(f.model, f.seed);
        Dataset ds = load_dataset(f.data);
        std::map<std::string, StyleVector> styles;
        std::vector<EvalCase> cases;
        for (const auto& rec : ds.records) {
            if (!styles.count(rec.user_id)) {
                const auto path =
                    std::filesystem::path(sw_vectors) / (rec.user_id + ".svec");
                styles.emplace(rec.user_id, load_vector(path));
            }
            cases.push_back({rec.user_id, rec.query, rec.reference});
        }
        const SweepReport rep = sweep(
            model, styles, cases, parse_int_list(sw_layers, "--layers"),
            parse_float_list(sw_alphas, "--alphas"), parse_metric(sw_metric),
            f.max_new, parse_positions(sw_positions));
        out << text_of(rep);
        if (!f.out.empty()) write_file(f.out, json_of(rep).dump(2) + "\n");
        if (!f.csv.empty()) write_file(f.csv, csv_of(rep));
    });

    // --- rank ---------------------------------------------------------------
    auto* sub_rk = app.add_subcommand(
        "rank", "rank a user's history by style affinity and BM25 relevance");
    std::string rk_vector, rk_query;
    add_model_flag(sub_rk, f);
    sub_rk->add_option("--data", f.data, "JSONL dataset")->required();
    sub_rk->add_option("--vector", rk_vector, "style vector (.svec)")->required();
    sub_rk->add_option("--query", rk_query, "query text (default: the record's)");
    sub_rk->add_option("--out", f.out, "JSON report path");
    sub_rk->add_option("--csv", f.csv, "CSV series path");
    add_common(sub_rk, f);
    sub_rk->callback([&] {
        const Model model = load_model(f.model, f.seed);
        const StyleVector sv = load_vector(rk_vector);
        Dataset ds = load_dataset(f.data);
        const DatasetRecord& rec = record_for(ds, sv.user_id);
        const std::string query = rk_query.empty() ? rec.query : rk_query;
        const RankReport rep = rank_history(model, sv, rec.history, query);
        out << text_of(rep);
        if (!f.out.empty()) write_file(f.out, json_of(rep).dump(2) + "\n");
        if (!f.csv.empty()) write_file(f.csv, csv_of(rep));
    });

    // --- cluster --------------------------------------------------------------
    auto* sub_cl = app.add_subcommand("cluster", "k-means over user style vectors");
    std::string cl_vectors;
    int cl_k = 2;
    sub_cl->add_option("--vectors", cl_vectors, "directory of .svec files")
        ->required();
    sub_cl->add_option("--k", cl_k, "number of clusters")->capture_default_str();
    sub_cl->add_option("--out", f.out, "JSON report path");
    sub_cl->add_option("--csv", f.csv, "CSV series path (user,cluster,x,y)");
    add_common(sub_cl, f);
    sub_cl->callback([&] {
        std::vector<StyleVector> styles;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(cl_vectors))
            if (entry.is_regular_file() && entry.path().extension() == ".svec")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) styles.push_back(load_vector(p));
        if (styles.empty()) throw DataError("no .svec files in " + cl_vectors);
        const ClusterReport rep = cluster_users(styles, cl_k, f.seed);
        out << text_of(rep);
        if (!f.out.empty()) write_file(f.out, json_of(rep).dump(2) + "\n");
        if (!f.csv.empty()) write_file(f.csv, csv_of(rep));
    });

    // --- eval -----------------------------------------------------------------
    auto* sub_ev = app.add_subcommand(
        "eval", "score generations against references (steered when --vectors given)");
    std::string ev_vectors, ev_metric = "rouge-l", ev_positions = "generated";
    int ev_layer = -1;
    float ev_alpha = 2.0f;
    add_model_flag(sub_ev, f);
    sub_ev->add_option("--data", f.data, "JSONL dataset with references")->required();
    sub_ev->add_option("--vectors", ev_vectors,
                       "directory of <user>.svec files (omit for unsteered)");
    sub_ev->add_option("--metric", ev_metric, "rouge-l|meteor-lite")
        ->capture_default_str();
    sub_ev->add_option("--layer", ev_layer, "intervention layer (default: vector's)");
    sub_ev->add_option("--alpha", ev_alpha, "intervention strength")
        ->capture_default_str();
    sub_ev->add_option("--positions", ev_positions, "all-input|last-input|generated")
        ->capture_default_str();
    sub_ev->add_option("--max-new", f.max_new, "generation budget")
        ->capture_default_str();
    sub_ev->add_option("--out", f.out, "JSONL results path");
    add_common(sub_ev, f);
    sub_ev->callback([&] {
        const Model model = load_model(f.model, f.seed);
        Dataset ds = load_dataset(f.data);
        const MetricId metric = parse_metric(ev_metric);
        std::map<std::string, StyleVector> styles;
        std::vector<Score> scores;
        std::ostringstream lines;
        for (const auto& rec : ds.records) {
            if (rec.reference.empty())
                throw DataError("record for user '" + rec.user_id + "' has no reference");
            std::string text;
            if (ev_vectors.empty()) {
                text = complete(model, rec.query, f.max_new);
            } else {
                if (!styles.count(rec.user_id)) {
                    const auto path =
                        std::filesystem::path(ev_vectors) / (rec.user_id + ".svec");
                    styles.emplace(rec.user_id, load_vector(path));
                }
                const StyleVector& sv = styles.at(rec.user_id);
                InterventionConfig cfg;
                cfg.layer = ev_layer >= 0 ? ev_layer : sv.layer;
                cfg.alpha = ev_alpha;
                cfg.positions = parse_positions(ev_positions);
                text = steer_generate(model, sv, cfg, rec.query, f.max_new, &diag);
            }
            const Score s = score_text(metric, text, rec.reference);
            scores.push_back(s);
            lines << nlohmann::json{{"user_id", rec.user_id},
                                    {"query", rec.query},
                                    {"output", text},
                                    {"score", s.value}}
                         .dump()
                  << "\n";
        }
        const double mean = corpus_mean(scores);
        out << to_string(metric) << " mean over " << scores.size() << " cases: "
            << mean << "\n";
        lines << nlohmann::json{{"metric", to_string(metric)},
                                {"n_cases", scores.size()},
                                {"mean", mean}}
                     .dump()
              << "\n";
        if (!f.out.empty()) write_file(f.out, lines.str());
    });

    // --- ablate -----------------------------------------------------------------
    auto* sub_ab = app.add_subcommand(
        "ablate", "full method x position grid on one user's history");
    std::string ab_user, ab_metric = "rouge-l", ab_marker;
    int ab_layer = -1;
    float ab_alpha = 2.0f;
    add_model_flag(sub_ab, f);
    sub_ab->add_option("--data", f.data, "JSONL dataset")->required();
    sub_ab->add_option("--user", ab_user, "user to ablate (default: first)");
    sub_ab->add_option("--layer", ab_layer, "intervention layer (default: 2L/3)");
    sub_ab->add_option("--alpha", ab_alpha, "intervention strength")
        ->capture_default_str();
    sub_ab->add_option("--metric", ab_metric,
                       "score outputs against the user's own outputs");
    sub_ab->add_option("--marker", ab_marker,
                       "score outputs by the rate containing this substring");
    sub_ab->add_option("--max-new", f.max_new, "generation budget")
        ->capture_default_str();
    sub_ab->add_option("--out", f.out, "JSON report path");
    sub_ab->add_option("--csv", f.csv, "CSV series path");
    add_common(sub_ab, f);
    sub_ab->callback([&] {
        const Model model = load_model(f.model, f.seed);
        Dataset ds = load_dataset(f.data);
        const std::string user = ab_user.empty() ? users_in(ds).front() : ab_user;
        const DatasetRecord& rec = record_for(ds, user);
        const auto pairs = neutral_ready(model, rec.history, f.max_new, diag);
        const int layer =
            ab_layer >= 0 ? ab_layer : default_intervention(model.config()).layer;
        ActivationResult ar = collect_activations(model, pairs, layer, f.jobs);
        for (const auto& s : ar.skipped)
            diag << "warning: pair " << s.index << " skipped: " << s.reason << "\n";
        std::vector<std::string> queries;
        std::vector<std::string> references;
        for (const auto& p : pairs) {
            queries.push_back(p.input);
            references.push_back(p.output);
        }
        const MetricId metric = parse_metric(ab_metric);
        auto score_fn = [&](const std::vector<std::string>& outputs) {
            if (!ab_marker.empty()) return marker_rate(outputs, ab_marker);
            std::vector<Score> ss;
            for (size_t i = 0; i < outputs.size(); ++i)
                ss.push_back(score_text(metric, outputs[i], references[i]));
            return corpus_mean(ss);
        };
        const AblationReport rep =
            ablate(model, ar.acts, queries, layer, ab_alpha, f.max_new, score_fn, user);
        out << text_of(rep);
        if (!f.out.empty()) write_file(f.out, json_of(rep).dump(2) + "\n");
        if (!f.csv.empty()) write_file(f.csv, csv_of(rep));
    });

    // --- dispatch ---------------------------------------------------------------
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        diag << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const UsageError& e) {
        diag << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        diag << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        diag << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        diag << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        diag << "internal error: " << e.what() << "\n";
        return 3;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace stylevec::cli
