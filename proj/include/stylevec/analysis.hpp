#pragma once

// Diagnostics around the style-vector pipeline: layer-wise linear probing of
// authentic-vs-neutral activations, style-vs-semantic ranking of a user's
// history, and k-means clustering of user vectors.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylevec/errors.hpp"
#include "stylevec/extract.hpp"
#include "stylevec/metrics.hpp"
#include "stylevec/model.hpp"
#include "stylevec/vecmath.hpp"

namespace stylevec {

// ---------------------------------------------------------------------------
// ROC-AUC
// ---------------------------------------------------------------------------

/// Mann-Whitney AUC: P(pos > neg) + 0.5 P(pos == neg), computed through
/// average ranks rather than pairwise counting.
inline double roc_auc(const std::vector<double>& pos_scores,
                      const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw EmptyInput("roc_auc needs non-empty score lists");
    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> all;
    all.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) all.push_back({s, true});
    for (double s : neg_scores) all.push_back({s, false});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k)
            if (all[k].positive) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(pos_scores.size());
    const double nn = static_cast<double>(neg_scores.size());
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// ---------------------------------------------------------------------------
// layer-wise probing
// ---------------------------------------------------------------------------

struct ProbeLayer {
    int layer = 0;
    double auc = 0.0;
    int n_samples = 0; // activations probed at this layer (train + test)
};

struct ProbeReport {
    std::vector<ProbeLayer> layers;
    int n_train_pairs = 0;
    int n_test_pairs = 0;
    std::vector<SkipReport> skipped;
};

/// Per layer: fit the shared logistic classifier on authentic (label +1) vs
/// neutral (label -1) last-token activations of a train split and report
/// held-out ROC-AUC. One capture pass per text covers every probed layer, so
/// the whole probe costs 2·|pairs| forward passes. Pairs are split (not
/// individual samples) so a pair's two activations never straddle the split.
inline ProbeReport probe_layers(const Model& model,
                                const std::vector<HistoryPair>& pairs,
                                const std::vector<int>& layers,
                                double test_fraction, uint64_t seed = 42) {
    if (layers.empty()) throw UsageError("no layers to probe");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigInvalid("test_fraction must be in (0, 1)");
    if (pairs.size() < 4)
        throw TooFewSamples("probing needs at least 4 history pairs");
    for (size_t i = 0; i < pairs.size(); ++i)
        if (!pairs[i].neutral)
            throw DataError("history pair " + std::to_string(i) +
                            " is missing its neutral completion");

    const std::set<int> want(layers.begin(), layers.end());
    ProbeReport rep;

    // last-token rows for every probed layer, one capture per text
    struct PairActs {
        std::map<int, std::vector<float>> p, n;
    };
    std::vector<PairActs> acts;
    for (size_t i = 0; i < pairs.size(); ++i) {
        try {
            const ForwardTrace tp =
                model.forward_capture(lm_input(join_xy(pairs[i].input, pairs[i].output)), want);
            const ForwardTrace tn = model.forward_capture(
                lm_input(join_xy(pairs[i].input, *pairs[i].neutral)), want);
            PairActs pa;
            for (int l : want) {
                const auto rp = tp.row(l, tp.n_positions - 1);
                const auto rn = tn.row(l, tn.n_positions - 1);
                pa.p[l].assign(rp.begin(), rp.end());
                pa.n[l].assign(rn.begin(), rn.end());
            }
            acts.push_back(std::move(pa));
        } catch (const SeqTooLong& e) {
            rep.skipped.push_back({i, e.what()});
        }
    }
    if (acts.size() < 4)
        throw TooFewSamples("fewer than 4 history pairs fit the context window");

    std::vector<size_t> order(acts.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    size_t n_test = static_cast<size_t>(
        std::lround(test_fraction * static_cast<double>(acts.size())));
    n_test = std::clamp<size_t>(n_test, 1, acts.size() - 1);
    const size_t n_train = acts.size() - n_test;
    rep.n_train_pairs = static_cast<int>(n_train);
    rep.n_test_pairs = static_cast<int>(n_test);

    for (int l : layers) {
        std::vector<std::span<const float>> xs;
        std::vector<int> ys;
        for (size_t k = 0; k < n_train; ++k) {
            const PairActs& pa = acts[order[k]];
            xs.emplace_back(pa.p.at(l));
            ys.push_back(+1);
            xs.emplace_back(pa.n.at(l));
            ys.push_back(-1);
        }
        const auto clf = numerics::fit_logistic(xs, ys);
        std::vector<double> pos, neg;
        for (size_t k = n_train; k < acts.size(); ++k) {
            const PairActs& pa = acts[order[k]];
            pos.push_back(clf.score(pa.p.at(l)));
            neg.push_back(clf.score(pa.n.at(l)));
        }
        rep.layers.push_back(
            {l, roc_auc(pos, neg), static_cast<int>(2 * acts.size())});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// BM25
// ---------------------------------------------------------------------------

/// Okapi BM25 over a fixed document list (k1=1.2, b=0.75) with the
/// always-positive idf variant ln(1 + (N-df+0.5)/(df+0.5)). Tokenization is
/// the shared metric tokenizer (lowercase, split on non-alphanumerics).
class Bm25 {
public:
    static constexpr double kK1 = 1.2;
    static constexpr double kB = 0.75;

    explicit Bm25(const std::vector<std::string>& docs) {
        if (docs.empty()) throw EmptyInput("BM25 needs at least one document");
        docs_.reserve(docs.size());
        double total_len = 0.0;
        for (const auto& d : docs) {
            auto toks = split_words(d);
            total_len += static_cast<double>(toks.size());
            std::unordered_map<std::string, int> tf;
            for (const auto& t : toks) ++tf[t];
            for (const auto& [t, _] : tf) ++df_[t];
            docs_.push_back({std::move(tf), toks.size()});
        }
        avg_len_ = docs_.empty() ? 1.0 : total_len / static_cast<double>(docs_.size());
        if (avg_len_ <= 0.0) avg_len_ = 1.0;
    }

    size_t size() const { return docs_.size(); }

    double score(std::string_view query, size_t doc_index) const {
        const Doc& doc = docs_.at(doc_index);
        double s = 0.0;
        for (const auto& term : split_words(query)) {
            const auto dfit = df_.find(term);
            if (dfit == df_.end()) continue;
            const auto tfit = doc.tf.find(term);
            if (tfit == doc.tf.end()) continue;
            const double n = static_cast<double>(docs_.size());
            const double df = static_cast<double>(dfit->second);
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double tf = static_cast<double>(tfit->second);
            const double len = static_cast<double>(doc.length);
            s += idf * tf * (kK1 + 1.0) /
                 (tf + kK1 * (1.0 - kB + kB * len / avg_len_));
        }
        return s;
    }

private:
    struct Doc {
        std::unordered_map<std::string, int> tf;
        size_t length = 0;
    };
    std::vector<Doc> docs_;
    std::unordered_map<std::string, int> df_;
    double avg_len_ = 1.0;
};

// ---------------------------------------------------------------------------
// style-vs-semantic ranking
// ---------------------------------------------------------------------------

struct RankItem {
    size_t index = 0;
    double style_score = 0.0; // cosine(last-token embedding of y_i, style)
    int style_rank = 0;
    double semantic_score = 0.0; // BM25(query, y_i)
    int semantic_rank = 0;
    // per-token style affinity: the 5 tokens of y_i whose hidden rows are
    // most aligned with the style vector
    std::vector<std::pair<std::string, double>> top_tokens;
};

struct RankReport {
    std::vector<RankItem> items;
    int layer = 0;
    std::string query;
};

namespace detail {

inline std::string token_display(int id) {
    if (id == textcodec::kBos) return "<bos>";
    if (id == textcodec::kEos) return "<eos>";
    if (id >= 0x20 && id < 0x7f) return std::string(1, static_cast<char>(id));
    static const char* hex = "0123456789abcdef";
    std::string s = "<0x";
    s.push_back(hex[(id >> 4) & 0xf]);
    s.push_back(hex[id & 0xf]);
    s += ">";
    return s;
}

// descending rank with ties broken by lower index (rank 1 = best)
inline std::vector<int> rank_desc(const std::vector<double>& scores) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> ranks(scores.size());
    for (size_t r = 0; r < order.size(); ++r)
        ranks[order[r]] = static_cast<int>(r + 1);
    return ranks;
}

} // namespace detail

/// Ranks a user's history outputs two ways: by cosine alignment of their
/// last-token embedding with the style vector, and by BM25 relevance to the
/// query. Outputs are embedded alone (the history text is what carries
/// style; inputs are shared context).
inline RankReport rank_history(const Model& model, const StyleVector& style,
                               const std::vector<HistoryPair>& pairs,
                               std::string_view query) {
    if (pairs.empty()) throw EmptyHistory("no history pairs");
    if (static_cast<int>(style.values.size()) != model.config().d_model)
        throw DimensionMismatch("style vector dimension != model d_model");
    const std::set<int> want{style.layer};

    RankReport rep;
    rep.layer = style.layer;
    rep.query = std::string(query);

    std::vector<double> style_scores, semantic_scores;
    std::vector<std::string> outputs;
    outputs.reserve(pairs.size());
    for (const auto& p : pairs) outputs.push_back(p.output);
    const Bm25 bm25(outputs);

    for (size_t i = 0; i < pairs.size(); ++i) {
        const TokenSeq seq = lm_input(pairs[i].output);
        const ForwardTrace tr = model.forward_capture(seq, want);
        const auto last = tr.row(style.layer, tr.n_positions - 1);
        RankItem item;
        item.index = i;
        item.style_score = cosine(last, style.values);
        item.semantic_score = bm25.score(query, i);

        std::vector<std::pair<std::string, double>> toks;
        toks.reserve(static_cast<size_t>(tr.n_positions));
        for (int t = 0; t < tr.n_positions; ++t)
            toks.emplace_back(detail::token_display(seq[static_cast<size_t>(t)]),
                              cosine(tr.row(style.layer, t), style.values));
        std::stable_sort(toks.begin(), toks.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (toks.size() > 5) toks.resize(5);
        item.top_tokens = std::move(toks);
        rep.items.push_back(std::move(item));
        style_scores.push_back(rep.items.back().style_score);
        semantic_scores.push_back(rep.items.back().semantic_score);
    }

    const auto sranks = detail::rank_desc(style_scores);
    const auto mranks = detail::rank_desc(semantic_scores);
    for (size_t i = 0; i < rep.items.size(); ++i) {
        rep.items[i].style_rank = sranks[i];
        rep.items[i].semantic_rank = mranks[i];
    }
    return rep;
}

// ---------------------------------------------------------------------------
// user clustering
// ---------------------------------------------------------------------------

struct ClusterReport {
    std::map<std::string, int> assignments;
    std::vector<std::vector<float>> centroids;
    std::map<std::string, std::array<float, 2>> projection; // top-2 PCA coords
    int iterations = 0;
    double objective = 0.0; // sum of squared distances to assigned centroids
};

/// Lloyd's k-means (seeded k-means++ init, <=300 iterations, centroid shift
/// < 1e-6) over user style vectors, plus a 2-D PCA projection of the
/// mean-centered vector set for plotting.
inline ClusterReport cluster_users(const std::vector<StyleVector>& styles, int k,
                                   uint64_t seed = 42) {
    if (k < 1) throw UsageError("k must be >= 1");
    if (static_cast<int>(styles.size()) < k)
        throw TooFewUsers("need at least k=" + std::to_string(k) + " users, have " +
                          std::to_string(styles.size()));
    const size_t n = styles.size();
    const size_t dim = styles[0].values.size();
    for (const auto& s : styles) {
        if (s.values.size() != dim)
            throw DimensionMismatch("style vectors have mixed dimensions");
        if (s.layer != styles[0].layer)
            throw DataError("style vectors span multiple layers");
    }

    auto sqdist = [&](const std::vector<float>& a, const std::vector<float>& b) {
        double s = 0.0;
        for (size_t d = 0; d < dim; ++d) {
            const double diff = static_cast<double>(a[d]) - b[d];
            s += diff * diff;
        }
        return s;
    };

    // k-means++ seeding
    Rng rng(seed);
    std::vector<std::vector<float>> centroids;
    centroids.reserve(static_cast<size_t>(k));
    centroids.push_back(styles[rng.below(n)].values);
    std::vector<double> d2(n);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = sqdist(styles[i].values, centroids[0]);
            for (size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, sqdist(styles[i].values, centroids[c]));
            d2[i] = best;
            total += best;
        }
        size_t pick = 0;
        if (total <= 0.0) {
            pick = rng.below(n); // all points coincide with a centroid
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) { pick = i; break; }
            }
        }
        centroids.push_back(styles[pick].values);
    }

    // Lloyd iterations
    std::vector<int> assign(n, 0);
    int iterations = 0;
    for (int it = 0; it < 300; ++it) {
        iterations = it + 1;
        for (size_t i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d = sqdist(styles[i].values, centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sqdist(styles[i].values, centroids[static_cast<size_t>(c)]);
                if (d < best_d) { best_d = d; best_c = c; }
            }
            assign[i] = best_c;
        }
        std::vector<std::vector<double>> sums(
            static_cast<size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (size_t i = 0; i < n; ++i) {
            ++counts[static_cast<size_t>(assign[i])];
            for (size_t d = 0; d < dim; ++d)
                sums[static_cast<size_t>(assign[i])][d] += styles[i].values[d];
        }
        // an emptied cluster grabs the point farthest from its centroid
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) continue;
            size_t far = 0;
            double far_d = -1.0;
            for (size_t i = 0; i < n; ++i) {
                const double d =
                    sqdist(styles[i].values, centroids[static_cast<size_t>(assign[i])]);
                if (d > far_d) { far_d = d; far = i; }
            }
            assign[far] = c;
            counts[static_cast<size_t>(c)] = 1;
            std::fill(sums[static_cast<size_t>(c)].begin(),
                      sums[static_cast<size_t>(c)].end(), 0.0);
            for (size_t d = 0; d < dim; ++d)
                sums[static_cast<size_t>(c)][d] = styles[far].values[d];
            // remove the stolen point from its previous sum
            // (recompute below is simpler: restart the accumulation)
            std::fill(counts.begin(), counts.end(), 0);
            for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
            for (size_t i = 0; i < n; ++i) {
                ++counts[static_cast<size_t>(assign[i])];
                for (size_t d = 0; d < dim; ++d)
                    sums[static_cast<size_t>(assign[i])][d] += styles[i].values[d];
            }
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            std::vector<float> next(dim);
            for (size_t d = 0; d < dim; ++d)
                next[d] = static_cast<float>(sums[static_cast<size_t>(c)][d] /
                                             counts[static_cast<size_t>(c)]);
            shift = std::max(shift, std::sqrt(sqdist(next, centroids[static_cast<size_t>(c)])));
            centroids[static_cast<size_t>(c)] = std::move(next);
        }
        if (shift < 1e-6) break;
    }

    ClusterReport rep;
    rep.iterations = iterations;
    rep.centroids = centroids;
    for (size_t i = 0; i < n; ++i) {
        rep.assignments[styles[i].user_id] = assign[i];
        rep.objective +=
            sqdist(styles[i].values, centroids[static_cast<size_t>(assign[i])]);
    }

    // 2-D projection: top-2 principal directions of the centered set
    std::vector<std::vector<double>> centered(n, std::vector<double>(dim, 0.0));
    std::vector<double> mean(dim, 0.0);
    for (const auto& s : styles)
        for (size_t d = 0; d < dim; ++d) mean[d] += s.values[d];
    for (double& m : mean) m /= static_cast<double>(n);
    double frob = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t d = 0; d < dim; ++d) {
            centered[i][d] = static_cast<double>(styles[i].values[d]) - mean[d];
            frob += centered[i][d] * centered[i][d];
        }

    std::vector<double> u1(dim, 0.0), u2(dim, 0.0);
    if (frob > 1e-18 && dim >= 1) {
        auto matvec = [&](const double* v, double* out) {
            std::fill(out, out + dim, 0.0);
            for (size_t i = 0; i < n; ++i) {
                double proj = 0.0;
                for (size_t d = 0; d < dim; ++d) proj += centered[i][d] * v[d];
                for (size_t d = 0; d < dim; ++d) out[d] += proj * centered[i][d];
            }
        };
        u1 = numerics::dominant_eigenvector(dim, matvec, centered[0]);
        double lambda1 = 0.0;
        {
            std::vector<double> img(dim);
            matvec(u1.data(), img.data());
            for (size_t d = 0; d < dim; ++d) lambda1 += u1[d] * img[d];
        }
        auto deflated = [&](const double* v, double* out) {
            matvec(v, out);
            double proj = 0.0;
            for (size_t d = 0; d < dim; ++d) proj += u1[d] * v[d];
            for (size_t d = 0; d < dim; ++d) out[d] -= lambda1 * proj * u1[d];
        };
        try {
            u2 = numerics::dominant_eigenvector(dim, deflated, {});
        } catch (const NumericError&) {
            std::fill(u2.begin(), u2.end(), 0.0); // rank-1 spread: flat second axis
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double a = 0.0, b = 0.0;
        for (size_t d = 0; d < dim; ++d) {
            a += centered[i][d] * u1[d];
            b += centered[i][d] * u2[d];
        }
        rep.projection[styles[i].user_id] = {static_cast<float>(a),
                                             static_cast<float>(b)};
    }
    return rep;
}

} // namespace stylevec
