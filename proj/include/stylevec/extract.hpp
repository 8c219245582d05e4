#pragma once

// Style-vector extraction: turn a user's (input, output) history into a
// single direction in activation space by contrasting the hidden states of
// user-authentic completions against style-agnostic ones.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "stylevec/errors.hpp"
#include "stylevec/model.hpp"
#include "stylevec/vecmath.hpp"

namespace stylevec {

enum class ExtractMethod : uint8_t { MeanDiff = 0, LogReg = 1, PCA = 2 };

inline const char* to_string(ExtractMethod m) {
    switch (m) {
        case ExtractMethod::MeanDiff: return "meandiff";
        case ExtractMethod::LogReg: return "logreg";
        case ExtractMethod::PCA: return "pca";
    }
    return "?";
}

inline ExtractMethod parse_method(std::string_view s) {
    if (s == "meandiff") return ExtractMethod::MeanDiff;
    if (s == "logreg") return ExtractMethod::LogReg;
    if (s == "pca") return ExtractMethod::PCA;
    throw UsageError("unknown method '" + std::string(s) +
                     "' (expected meandiff|logreg|pca)");
}

/// One history item: what the user wrote for an input, plus (once generated
/// or supplied) the style-agnostic counterpart.
struct HistoryPair {
    std::string input;
    std::string output;
    std::optional<std::string> neutral;
};

struct ActivationPair {
    int layer = 0;
    std::vector<float> a_p;   // h(x ⊕ y)  last token
    std::vector<float> a_n;   // h(x ⊕ ŷ) last token
    std::vector<float> delta; // a_p − a_n
};

struct StyleVector {
    std::string user_id;
    int layer = 0;
    ExtractMethod method = ExtractMethod::MeanDiff;
    std::vector<float> values;
    int n_pairs = 0;
    std::chrono::system_clock::time_point created_at{};
};

/// x ⊕ y: plain concatenation with a single newline separator.
inline std::string join_xy(std::string_view x, std::string_view y) {
    std::string s;
    s.reserve(x.size() + 1 + y.size());
    s.append(x);
    s.push_back('\n');
    s.append(y);
    return s;
}

/// Completion prompt for an input: everything up to and including the
/// separator, so generation begins exactly where y would.
inline std::string completion_prompt(std::string_view x) {
    std::string s(x);
    s.push_back('\n');
    return s;
}

struct SkipReport {
    size_t index;
    std::string reason;
};

// ---------------------------------------------------------------------------
// pipeline stages
// ---------------------------------------------------------------------------

struct NeutralResult {
    std::vector<HistoryPair> pairs;     // all pairs; skipped ones keep neutral unset
    std::vector<SkipReport> skipped;
};

/// Fills each pair's style-agnostic completion by unsteered greedy decoding
/// from its input. Pairs that already carry one are returned untouched;
/// pairs whose prompt would overflow the context are skipped and reported.
inline NeutralResult gen_neutral(const Model& model, std::vector<HistoryPair> pairs,
                                 int max_new) {
    if (pairs.empty()) throw EmptyHistory("no history pairs");
    NeutralResult res;
    for (size_t i = 0; i < pairs.size(); ++i) {
        HistoryPair& p = pairs[i];
        if (p.input.empty() || p.output.empty())
            throw DataError("history pair " + std::to_string(i) +
                            " has an empty input or output");
        if (p.neutral) continue;
        try {
            const TokenSeq out =
                model.generate(lm_input(completion_prompt(p.input)), max_new);
            p.neutral = textcodec::decode_lossy(out);
        } catch (const SeqTooLong& e) {
            res.skipped.push_back({i, e.what()});
        }
    }
    res.pairs = std::move(pairs);
    return res;
}

struct ActivationResult {
    std::vector<ActivationPair> acts; // order follows the surviving input pairs
    std::vector<SkipReport> skipped;
};

/// Last-token hidden states of x ⊕ y and x ⊕ ŷ at one layer. `jobs` bounds
/// concurrent forward passes; results are slot-indexed so the output order
/// is identical regardless of jobs.
inline ActivationResult collect_activations(const Model& model,
                                            const std::vector<HistoryPair>& pairs,
                                            int layer, int jobs = 1) {
    if (pairs.empty()) throw EmptyHistory("no history pairs");
    const auto& cfg = model.config();
    if (layer < 0 || layer >= cfg.n_layers)
        throw LayerOutOfRange("layer " + std::to_string(layer) + " not in [0, " +
                              std::to_string(cfg.n_layers) + ")");
    for (size_t i = 0; i < pairs.size(); ++i)
        if (!pairs[i].neutral)
            throw DataError("history pair " + std::to_string(i) +
                            " is missing its neutral completion");

    const size_t n = pairs.size();
    std::vector<std::optional<ActivationPair>> slots(n);
    std::vector<std::optional<std::string>> errors(n);

    auto work_one = [&](size_t i) {
        const HistoryPair& p = pairs[i];
        try {
            const std::set<int> want{layer};
            const TokenSeq seq_p = lm_input(join_xy(p.input, p.output));
            const TokenSeq seq_n = lm_input(join_xy(p.input, *p.neutral));
            const ForwardTrace tp = model.forward_capture(seq_p, want);
            const ForwardTrace tn = model.forward_capture(seq_n, want);
            ActivationPair ap;
            ap.layer = layer;
            const auto rp = tp.row(layer, tp.n_positions - 1);
            const auto rn = tn.row(layer, tn.n_positions - 1);
            ap.a_p.assign(rp.begin(), rp.end());
            ap.a_n.assign(rn.begin(), rn.end());
            ap.delta.resize(ap.a_p.size());
            for (size_t d = 0; d < ap.delta.size(); ++d)
                ap.delta[d] = ap.a_p[d] - ap.a_n[d];
            slots[i] = std::move(ap);
        } catch (const SeqTooLong& e) {
            errors[i] = e.what();
        }
    };

    if (jobs <= 1) {
        for (size_t i = 0; i < n; ++i) work_one(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work_one(i);
        };
        std::vector<std::thread> threads;
        const int nt = std::min<int>(jobs, static_cast<int>(n));
        threads.reserve(static_cast<size_t>(nt));
        for (int t = 0; t < nt; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    ActivationResult res;
    for (size_t i = 0; i < n; ++i) {
        if (slots[i]) res.acts.push_back(std::move(*slots[i]));
        else res.skipped.push_back({i, errors[i] ? *errors[i] : "skipped"});
    }
    return res;
}

// ---------------------------------------------------------------------------
// shared numerics
// ---------------------------------------------------------------------------

namespace numerics {

/// L2-regularized logistic regression without intercept, fit by full-batch
/// gradient descent on per-dimension standardized features. Labels are ±1.
struct LogisticModel {
    std::vector<double> w;      // weights in standardized space
    std::vector<double> mean;   // per-dimension sample mean
    std::vector<double> scale;  // per-dimension sample stddev (1 where constant)
    int steps_run = 0;
    double grad_norm = 0.0;

    double score(std::span<const float> x) const {
        double s = 0.0;
        for (size_t d = 0; d < w.size(); ++d)
            s += w[d] * ((static_cast<double>(x[d]) - mean[d]) / scale[d]);
        return s;
    }

    /// Weights mapped back to raw feature space (w_d / σ_d), unnormalized.
    std::vector<double> raw_direction() const {
        std::vector<double> out(w.size());
        for (size_t d = 0; d < w.size(); ++d) out[d] = w[d] / scale[d];
        return out;
    }
};

struct LogisticOptions {
    double lambda = 1e-3;
    double lr = 0.1;
    int max_steps = 500;
    double grad_tol = 1e-8;
};

inline LogisticModel fit_logistic(const std::vector<std::span<const float>>& xs,
                                  const std::vector<int>& ys,
                                  const LogisticOptions& opt = {}) {
    if (xs.empty()) throw EmptyInput("no samples to fit");
    if (xs.size() != ys.size()) throw DimensionMismatch("samples/labels length mismatch");
    const size_t n = xs.size();
    const size_t d = xs[0].size();
    for (const auto& x : xs)
        if (x.size() != d) throw DimensionMismatch("ragged sample dimensions");

    LogisticModel m;
    m.mean.assign(d, 0.0);
    m.scale.assign(d, 0.0);
    for (const auto& x : xs)
        for (size_t j = 0; j < d; ++j) m.mean[j] += x[j];
    for (size_t j = 0; j < d; ++j) m.mean[j] /= static_cast<double>(n);
    for (const auto& x : xs)
        for (size_t j = 0; j < d; ++j) {
            const double c = x[j] - m.mean[j];
            m.scale[j] += c * c;
        }
    for (size_t j = 0; j < d; ++j) {
        m.scale[j] = std::sqrt(m.scale[j] / static_cast<double>(n));
        if (m.scale[j] < 1e-12) m.scale[j] = 1.0; // constant feature: z-score is 0
    }

    std::vector<std::vector<double>> z(n, std::vector<double>(d));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < d; ++j)
            z[i][j] = (static_cast<double>(xs[i][j]) - m.mean[j]) / m.scale[j];

    m.w.assign(d, 0.0);
    std::vector<double> grad(d);
    for (int step = 0; step < opt.max_steps; ++step) {
        for (size_t j = 0; j < d; ++j) grad[j] = 2.0 * opt.lambda * m.w[j];
        for (size_t i = 0; i < n; ++i) {
            double margin = 0.0;
            for (size_t j = 0; j < d; ++j) margin += z[i][j] * m.w[j];
            margin *= ys[i];
            // d/dw log(1+exp(−margin)) = −y·x·sigmoid(−margin)
            const double sig = 1.0 / (1.0 + std::exp(margin));
            const double coef = -static_cast<double>(ys[i]) * sig;
            for (size_t j = 0; j < d; ++j) grad[j] += coef * z[i][j];
        }
        double gn = 0.0;
        for (size_t j = 0; j < d; ++j) gn += grad[j] * grad[j];
        gn = std::sqrt(gn);
        m.steps_run = step + 1;
        m.grad_norm = gn;
        if (gn < opt.grad_tol) break;
        for (size_t j = 0; j < d; ++j) m.w[j] -= opt.lr * grad[j];
    }
    return m;
}

/// Dominant unit eigenvector of a PSD operator given through its matvec.
/// Starts from `start` (falls back to basis vectors when it is zero or maps
/// to zero) and stops when successive iterates differ by < tol.
inline std::vector<double> dominant_eigenvector(
    size_t dim, const std::function<void(const double*, double*)>& matvec,
    std::vector<double> start, double tol = 1e-8, int max_iter = 10000) {
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    std::vector<double> v = std::move(start);
    v.resize(dim, 0.0);
    size_t next_basis = 0;
    auto ensure_usable = [&](std::vector<double>& u) {
        while (norm(u) < 1e-12) {
            if (next_basis >= dim)
                throw NumericError("power iteration: operator has no nonzero image");
            std::fill(u.begin(), u.end(), 0.0);
            u[next_basis++] = 1.0;
            // probe: does this basis vector map to something nonzero?
            std::vector<double> img(dim);
            matvec(u.data(), img.data());
            if (norm(img) >= 1e-12) break;
            std::fill(u.begin(), u.end(), 0.0); // keep scanning
        }
    };

    ensure_usable(v);
    double n0 = norm(v);
    for (double& x : v) x /= n0;

    std::vector<double> next(dim);
    for (int it = 0; it < max_iter; ++it) {
        matvec(v.data(), next.data());
        const double nn = norm(next);
        if (nn < 1e-12) { // v fell in the kernel; restart off a basis vector
            std::fill(v.begin(), v.end(), 0.0);
            ensure_usable(v);
            const double nv = norm(v);
            for (double& x : v) x /= nv;
            continue;
        }
        for (double& x : next) x /= nn;
        double diff = 0.0;
        for (size_t j = 0; j < dim; ++j) {
            const double dlt = next[j] - v[j];
            diff += dlt * dlt;
        }
        v = next;
        if (std::sqrt(diff) < tol) break;
    }
    return v;
}

} // namespace numerics

// ---------------------------------------------------------------------------
// extracting functions
// ---------------------------------------------------------------------------

namespace detail {

inline void check_acts(const std::vector<ActivationPair>& acts) {
    if (acts.empty()) throw EmptyHistory("no activation pairs");
    const int layer = acts[0].layer;
    const size_t d = acts[0].delta.size();
    for (const auto& a : acts) {
        if (a.layer != layer)
            throw DataError("activation pairs span multiple layers");
        if (a.a_p.size() != d || a.a_n.size() != d || a.delta.size() != d)
            throw DimensionMismatch("activation pairs have mixed dimensions");
    }
}

inline std::vector<double> mean_delta(const std::vector<ActivationPair>& acts) {
    std::vector<double> m(acts[0].delta.size(), 0.0);
    for (const auto& a : acts)
        for (size_t d = 0; d < m.size(); ++d) m[d] += a.delta[d];
    for (double& x : m) x /= static_cast<double>(acts.size());
    return m;
}

inline StyleVector make_style(std::string user_id, int layer, ExtractMethod method,
                              std::vector<float> values, int n_pairs) {
    StyleVector sv;
    sv.user_id = std::move(user_id);
    sv.layer = layer;
    sv.method = method;
    sv.values = std::move(values);
    sv.n_pairs = n_pairs;
    sv.created_at = std::chrono::system_clock::now();
    return sv;
}

} // namespace detail

/// s_u = (1/|P_u|) Σ (a_p,i − a_n,i); deliberately unnormalized.
inline StyleVector mean_difference(const std::vector<ActivationPair>& acts,
                                   std::string user_id = {}) {
    detail::check_acts(acts);
    const auto m = detail::mean_delta(acts);
    std::vector<float> values(m.size());
    for (size_t d = 0; d < m.size(); ++d) values[d] = static_cast<float>(m[d]);
    return detail::make_style(std::move(user_id), acts[0].layer,
                              ExtractMethod::MeanDiff, std::move(values),
                              static_cast<int>(acts.size()));
}

/// Unit normal of the logistic decision boundary separating authentic from
/// neutral activations (fit standardized, mapped back to activation space).
inline StyleVector logreg_direction(const std::vector<ActivationPair>& acts,
                                    std::string user_id = {}) {
    detail::check_acts(acts);
    bool any_sep = false;
    for (const auto& a : acts)
        for (float d : a.delta)
            if (std::fabs(d) >= 1e-9) { any_sep = true; break; }
    if (!any_sep)
        throw DegenerateSeparation("positive and negative activations coincide");

    std::vector<std::span<const float>> xs;
    std::vector<int> ys;
    xs.reserve(acts.size() * 2);
    ys.reserve(acts.size() * 2);
    for (const auto& a : acts) {
        xs.emplace_back(a.a_p);
        ys.push_back(+1);
        xs.emplace_back(a.a_n);
        ys.push_back(-1);
    }
    const auto fit = numerics::fit_logistic(xs, ys);
    auto dir = fit.raw_direction();
    double n = 0.0;
    for (double x : dir) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-12)
        throw DegenerateSeparation("classes are statistically identical; no direction");
    std::vector<float> values(dir.size());
    for (size_t d = 0; d < dir.size(); ++d)
        values[d] = static_cast<float>(dir[d] / n);
    return detail::make_style(std::move(user_id), acts[0].layer,
                              ExtractMethod::LogReg, std::move(values),
                              static_cast<int>(acts.size()));
}

/// Unit direction of maximum variance of the paired differences: dominant
/// eigenvector of S = Σ Δ_i Δ_iᵀ (power iteration; S never materialized),
/// sign anchored so values · meanΔ ≥ 0.
inline StyleVector pca_direction(const std::vector<ActivationPair>& acts,
                                 std::string user_id = {}) {
    detail::check_acts(acts);
    const size_t dim = acts[0].delta.size();
    bool any_nonzero = false;
    for (const auto& a : acts)
        for (float d : a.delta)
            if (d != 0.0f) { any_nonzero = true; break; }
    if (!any_nonzero) throw ZeroVariance("all activation differences are zero");

    auto matvec = [&](const double* v, double* out) {
        std::fill(out, out + dim, 0.0);
        for (const auto& a : acts) {
            double proj = 0.0;
            for (size_t d = 0; d < dim; ++d)
                proj += static_cast<double>(a.delta[d]) * v[d];
            for (size_t d = 0; d < dim; ++d)
                out[d] += proj * static_cast<double>(a.delta[d]);
        }
    };

    const auto v = numerics::dominant_eigenvector(dim, matvec, detail::mean_delta(acts));

    const auto m = detail::mean_delta(acts);
    double dot_m = 0.0;
    for (size_t d = 0; d < dim; ++d) dot_m += v[d] * m[d];
    const double sign = dot_m < 0.0 ? -1.0 : 1.0;

    std::vector<float> values(dim);
    for (size_t d = 0; d < dim; ++d) values[d] = static_cast<float>(sign * v[d]);
    return detail::make_style(std::move(user_id), acts[0].layer, ExtractMethod::PCA,
                              std::move(values), static_cast<int>(acts.size()));
}

inline StyleVector extract_style(const std::vector<ActivationPair>& acts,
                                 ExtractMethod method, std::string user_id = {}) {
    switch (method) {
        case ExtractMethod::MeanDiff: return mean_difference(acts, std::move(user_id));
        case ExtractMethod::LogReg: return logreg_direction(acts, std::move(user_id));
        case ExtractMethod::PCA: return pca_direction(acts, std::move(user_id));
    }
    throw UsageError("unknown extraction method");
}

} // namespace stylevec
