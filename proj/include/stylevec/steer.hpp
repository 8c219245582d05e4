#pragma once

// Personalized generation: wrap a style vector into a residual-stream hook
// and decode with it, plus the (layer, alpha) grid sweep used to pick the
// intervention point and the method x position ablation grid.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "stylevec/extract.hpp"
#include "stylevec/metrics.hpp"
#include "stylevec/model.hpp"

namespace stylevec {

struct InterventionConfig {
    int layer = 0;
    float alpha = 2.0f;
    PositionPolicy positions = PositionPolicy::GeneratedOnly;
};

/// Heuristic defaults when no sweep has run: intervene at two-thirds depth
/// with a gentle positive strength.
inline InterventionConfig default_intervention(const ModelConfig& cfg) {
    return InterventionConfig{(2 * cfg.n_layers) / 3, 2.0f,
                              PositionPolicy::GeneratedOnly};
}

inline PositionPolicy parse_positions(std::string_view s) {
    if (s == "all-input") return PositionPolicy::AllInput;
    if (s == "last-input") return PositionPolicy::LastInputToken;
    if (s == "generated") return PositionPolicy::GeneratedOnly;
    throw UsageError("unknown positions '" + std::string(s) +
                     "' (expected all-input|last-input|generated)");
}

/// Unsteered greedy completion for an input (the same prompt convention the
/// extraction pipeline uses: input followed by the separator newline).
inline std::string complete(const Model& model, std::string_view input, int max_new) {
    const TokenSeq out = model.generate(lm_input(completion_prompt(input)), max_new);
    return textcodec::decode_lossy(out);
}

/// Greedy completion with the style vector added into layer cfg.layer at the
/// positions the policy selects. cfg.layer may differ from style.layer (a
/// sweep probes other layers); that mismatch is warned, not rejected.
inline std::string steer_generate(const Model& model, const StyleVector& style,
                                  const InterventionConfig& cfg,
                                  std::string_view input, int max_new,
                                  std::ostream* warn = nullptr) {
    if (static_cast<int>(style.values.size()) != model.config().d_model)
        throw DimensionMismatch("style vector dimension " +
                                std::to_string(style.values.size()) +
                                " != model d_model " +
                                std::to_string(model.config().d_model));
    if (warn && cfg.layer != style.layer)
        *warn << "warning: steering layer " << cfg.layer
              << " differs from the vector's extraction layer " << style.layer
              << "\n";
    const HookSpec hook{cfg.layer, style.values, cfg.alpha, cfg.positions};
    const TokenSeq out =
        model.generate(lm_input(completion_prompt(input)), max_new, hook);
    return textcodec::decode_lossy(out);
}

// ---------------------------------------------------------------------------
// (layer, alpha) sweep
// ---------------------------------------------------------------------------

/// One validation example; references are required (the sweep scores cells).
struct EvalCase {
    std::string user_id;
    std::string query;
    std::string reference;
};

struct SweepCell {
    int layer = 0;
    float alpha = 0.0f;
    double mean_score = 0.0;
    bool valid = false;
    std::string error; // first per-cell failure, when invalid
};

struct SweepReport {
    std::vector<SweepCell> cells; // layers-major, alphas-minor, grid order
    int best_index = -1;          // -1 when every cell failed
    MetricId metric = MetricId::RougeL;
    int n_cases = 0;
    int max_new = 0;

    const SweepCell& best() const {
        if (best_index < 0) throw NumericError("sweep produced no valid cell");
        return cells[static_cast<size_t>(best_index)];
    }
};

/// Mean metric over the validation cases for every (layer, alpha) cell.
/// A failing cell is recorded invalid with its error; the grid continues.
/// Best cell = highest mean, ties to smaller |alpha| then lower layer.
inline SweepReport sweep(const Model& model,
                         const std::map<std::string, StyleVector>& style_per_user,
                         const std::vector<EvalCase>& validation,
                         const std::vector<int>& layers,
                         const std::vector<float>& alphas, MetricId metric,
                         int max_new = 64,
                         PositionPolicy positions = PositionPolicy::GeneratedOnly) {
    if (layers.empty() || alphas.empty()) throw UsageError("empty sweep grid");
    if (validation.empty()) throw EmptyInput("empty validation set");
    for (const auto& c : validation)
        if (c.reference.empty())
            throw DataError("validation case for user '" + c.user_id +
                            "' has no reference");

    SweepReport rep;
    rep.metric = metric;
    rep.n_cases = static_cast<int>(validation.size());
    rep.max_new = max_new;
    rep.cells.reserve(layers.size() * alphas.size());

    for (int layer : layers) {
        for (float alpha : alphas) {
            SweepCell cell;
            cell.layer = layer;
            cell.alpha = alpha;
            try {
                std::vector<Score> scores;
                scores.reserve(validation.size());
                for (const auto& c : validation) {
                    const auto it = style_per_user.find(c.user_id);
                    if (it == style_per_user.end())
                        throw DataError("no style vector for user '" + c.user_id + "'");
                    const InterventionConfig cfg{layer, alpha, positions};
                    const std::string out =
                        steer_generate(model, it->second, cfg, c.query, max_new);
                    scores.push_back(score_text(metric, out, c.reference));
                }
                cell.mean_score = corpus_mean(scores);
                cell.valid = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            rep.cells.push_back(std::move(cell));
        }
    }

    for (size_t i = 0; i < rep.cells.size(); ++i) {
        const SweepCell& c = rep.cells[i];
        if (!c.valid) continue;
        if (rep.best_index < 0) {
            rep.best_index = static_cast<int>(i);
            continue;
        }
        const SweepCell& b = rep.cells[static_cast<size_t>(rep.best_index)];
        const bool better =
            c.mean_score > b.mean_score ||
            (c.mean_score == b.mean_score &&
             (std::fabs(c.alpha) < std::fabs(b.alpha) ||
              (std::fabs(c.alpha) == std::fabs(b.alpha) && c.layer < b.layer)));
        if (better) rep.best_index = static_cast<int>(i);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// method x position ablation
// ---------------------------------------------------------------------------

struct AblationCell {
    ExtractMethod method;
    PositionPolicy positions;
    double score = 0.0; // caller-chosen scoring of the steered outputs
    bool valid = false;
    std::string error;
};

struct AblationReport {
    std::vector<AblationCell> cells; // 3 methods x 3 policies, method-major
    int layer = 0;
    float alpha = 0.0f;
};

/// Runs the full {MeanDiff, LogReg, PCA} x {AllInput, LastInputToken,
/// GeneratedOnly} grid: extract per method from `acts`, steer every query,
/// score the outputs with `score_outputs` (e.g. a marker rate or a mean
/// metric against references).
template <typename ScoreFn>
AblationReport ablate(const Model& model, const std::vector<ActivationPair>& acts,
                      const std::vector<std::string>& queries, int layer,
                      float alpha, int max_new, ScoreFn&& score_outputs,
                      std::string user_id = {}) {
    static constexpr ExtractMethod kMethods[] = {
        ExtractMethod::MeanDiff, ExtractMethod::LogReg, ExtractMethod::PCA};
    static constexpr PositionPolicy kPolicies[] = {
        PositionPolicy::AllInput, PositionPolicy::LastInputToken,
        PositionPolicy::GeneratedOnly};

    AblationReport rep;
    rep.layer = layer;
    rep.alpha = alpha;
    for (ExtractMethod method : kMethods) {
        std::optional<StyleVector> style;
        std::string extract_error;
        try {
            style = extract_style(acts, method, user_id);
        } catch (const Error& e) {
            extract_error = e.what();
        }
        for (PositionPolicy pos : kPolicies) {
            AblationCell cell;
            cell.method = method;
            cell.positions = pos;
            if (!style) {
                cell.error = extract_error;
                rep.cells.push_back(std::move(cell));
                continue;
            }
            try {
                std::vector<std::string> outputs;
                outputs.reserve(queries.size());
                const InterventionConfig cfg{layer, alpha, pos};
                for (const auto& q : queries)
                    outputs.push_back(steer_generate(model, *style, cfg, q, max_new));
                cell.score = score_outputs(outputs);
                cell.valid = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

} // namespace stylevec
