#pragma once

// Report rendering: machine-readable JSON, aligned text tables, and tidy
// long-format CSV series for external plotting.

#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"

#include "stylevec/analysis.hpp"
#include "stylevec/extract.hpp"
#include "stylevec/steer.hpp"

namespace stylevec {

inline nlohmann::json json_of(const StyleVector& sv) {
    double n2 = 0.0;
    for (float v : sv.values) n2 += static_cast<double>(v) * v;
    return nlohmann::json{{"user_id", sv.user_id},
                          {"layer", sv.layer},
                          {"method", to_string(sv.method)},
                          {"dim", sv.values.size()},
                          {"n_pairs", sv.n_pairs},
                          {"norm", std::sqrt(n2)}};
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

inline nlohmann::json json_of(const ProbeReport& rep) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : rep.layers)
        layers.push_back({{"layer", l.layer}, {"auc", l.auc}, {"n_samples", l.n_samples}});
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& s : rep.skipped)
        skipped.push_back({{"index", s.index}, {"reason", s.reason}});
    return nlohmann::json{{"layers", layers},
                          {"n_train_pairs", rep.n_train_pairs},
                          {"n_test_pairs", rep.n_test_pairs},
                          {"skipped", skipped}};
}

inline std::string text_of(const ProbeReport& rep) {
    std::ostringstream os;
    os << "layer     auc  samples\n";
    for (const auto& l : rep.layers)
        os << std::setw(5) << l.layer << "  " << std::fixed << std::setprecision(4)
           << std::setw(6) << l.auc << "  " << std::setw(7) << l.n_samples << "\n";
    os << "split: " << rep.n_train_pairs << " train / " << rep.n_test_pairs
       << " test pairs\n";
    return os.str();
}

inline std::string csv_of(const ProbeReport& rep) {
    std::ostringstream os;
    os << "layer,auc\n";
    for (const auto& l : rep.layers)
        os << l.layer << "," << std::setprecision(10) << l.auc << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

inline nlohmann::json json_of(const SweepReport& rep) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rep.cells) {
        nlohmann::json j{{"layer", c.layer},
                         {"alpha", c.alpha},
                         {"valid", c.valid}};
        if (c.valid) j["mean_score"] = c.mean_score;
        else j["error"] = c.error;
        cells.push_back(std::move(j));
    }
    nlohmann::json j{{"metric", to_string(rep.metric)},
                     {"n_cases", rep.n_cases},
                     {"max_new", rep.max_new},
                     {"cells", cells}};
    if (rep.best_index >= 0) {
        const auto& b = rep.best();
        j["best"] = {{"layer", b.layer}, {"alpha", b.alpha}, {"mean_score", b.mean_score}};
    }
    return j;
}

inline std::string text_of(const SweepReport& rep) {
    std::ostringstream os;
    os << "layer   alpha  " << to_string(rep.metric) << "\n";
    for (const auto& c : rep.cells) {
        os << std::setw(5) << c.layer << "  " << std::fixed << std::setprecision(2)
           << std::setw(6) << c.alpha << "  ";
        if (c.valid) os << std::setprecision(4) << c.mean_score;
        else os << "error: " << c.error;
        os << "\n";
    }
    if (rep.best_index >= 0) {
        const auto& b = rep.best();
        os << "best: layer " << b.layer << ", alpha " << std::setprecision(2)
           << b.alpha << " (" << std::setprecision(4) << b.mean_score << ")\n";
    }
    return os.str();
}

inline std::string csv_of(const SweepReport& rep) {
    std::ostringstream os;
    os << "layer,alpha,mean_score,valid\n";
    for (const auto& c : rep.cells)
        os << c.layer << "," << c.alpha << ","
           << std::setprecision(10) << (c.valid ? c.mean_score : 0.0) << ","
           << (c.valid ? 1 : 0) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

inline nlohmann::json json_of(const RankReport& rep) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : rep.items) {
        nlohmann::json toks = nlohmann::json::array();
        for (const auto& [tok, score] : it.top_tokens)
            toks.push_back({{"token", tok}, {"cosine", score}});
        items.push_back({{"index", it.index},
                         {"style_score", it.style_score},
                         {"style_rank", it.style_rank},
                         {"semantic_score", it.semantic_score},
                         {"semantic_rank", it.semantic_rank},
                         {"top_tokens", toks}});
    }
    return nlohmann::json{{"layer", rep.layer}, {"query", rep.query}, {"items", items}};
}

inline std::string text_of(const RankReport& rep) {
    std::ostringstream os;
    os << "idx  style_score  style_rank  bm25_score  bm25_rank\n";
    for (const auto& it : rep.items)
        os << std::setw(3) << it.index << "  " << std::fixed << std::setprecision(4)
           << std::setw(11) << it.style_score << "  " << std::setw(10) << it.style_rank
           << "  " << std::setw(10) << it.semantic_score << "  " << std::setw(9)
           << it.semantic_rank << "\n";
    return os.str();
}

inline std::string csv_of(const RankReport& rep) {
    std::ostringstream os;
    os << "index,style_score,style_rank,semantic_score,semantic_rank\n";
    for (const auto& it : rep.items)
        os << it.index << "," << std::setprecision(10) << it.style_score << ","
           << it.style_rank << "," << it.semantic_score << "," << it.semantic_rank
           << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

inline nlohmann::json json_of(const ClusterReport& rep) {
    nlohmann::json assignments = nlohmann::json::object();
    for (const auto& [user, c] : rep.assignments) assignments[user] = c;
    nlohmann::json projection = nlohmann::json::object();
    for (const auto& [user, xy] : rep.projection)
        projection[user] = {xy[0], xy[1]};
    nlohmann::json centroids = nlohmann::json::array();
    for (const auto& c : rep.centroids) centroids.push_back(c);
    return nlohmann::json{{"assignments", assignments},
                          {"projection", projection},
                          {"centroids", centroids},
                          {"iterations", rep.iterations},
                          {"objective", rep.objective}};
}

inline std::string text_of(const ClusterReport& rep) {
    std::ostringstream os;
    os << "user            cluster        x        y\n";
    for (const auto& [user, c] : rep.assignments) {
        const auto& xy = rep.projection.at(user);
        os << std::left << std::setw(14) << user << std::right << "  " << std::setw(7)
           << c << "  " << std::fixed << std::setprecision(4) << std::setw(7) << xy[0]
           << "  " << std::setw(7) << xy[1] << "\n";
    }
    os << "k=" << rep.centroids.size() << ", objective " << std::setprecision(6)
       << rep.objective << " after " << rep.iterations << " iterations\n";
    return os.str();
}

inline std::string csv_of(const ClusterReport& rep) {
    std::ostringstream os;
    os << "user_id,cluster,x,y\n";
    for (const auto& [user, c] : rep.assignments) {
        const auto& xy = rep.projection.at(user);
        os << user << "," << c << "," << std::setprecision(10) << xy[0] << ","
           << xy[1] << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

inline nlohmann::json json_of(const AblationReport& rep) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rep.cells) {
        nlohmann::json j{{"method", to_string(c.method)},
                         {"positions", to_string(c.positions)},
                         {"valid", c.valid}};
        if (c.valid) j["score"] = c.score;
        else j["error"] = c.error;
        cells.push_back(std::move(j));
    }
    return nlohmann::json{{"layer", rep.layer}, {"alpha", rep.alpha}, {"cells", cells}};
}

inline std::string text_of(const AblationReport& rep) {
    std::ostringstream os;
    os << "method    positions    score\n";
    for (const auto& c : rep.cells) {
        os << std::left << std::setw(8) << to_string(c.method) << "  " << std::setw(11)
           << to_string(c.positions) << std::right << "  ";
        if (c.valid) os << std::fixed << std::setprecision(4) << c.score;
        else os << "error: " << c.error;
        os << "\n";
    }
    return os.str();
}

inline std::string csv_of(const AblationReport& rep) {
    std::ostringstream os;
    os << "method,positions,score,valid\n";
    for (const auto& c : rep.cells)
        os << to_string(c.method) << "," << to_string(c.positions) << ","
           << std::setprecision(10) << (c.valid ? c.score : 0.0) << ","
           << (c.valid ? 1 : 0) << "\n";
    return os.str();
}

} // namespace stylevec
