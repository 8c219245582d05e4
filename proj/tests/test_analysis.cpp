#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "stylevec/analysis.hpp"
#include "stylevec/extract.hpp"
#include "stylevec/model.hpp"
#include "stylevec/vecmath.hpp"
#include "support/oracles.hpp"

using namespace stylevec;

namespace {

ModelConfig small_cfg(uint64_t seed = 13) {
    ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_ff = 16;
    cfg.max_seq_len = 64;
    cfg.seed = seed;
    return cfg;
}

StyleVector mk_style(std::string id, std::vector<float> values, int layer = 0) {
    StyleVector sv;
    sv.user_id = std::move(id);
    sv.layer = layer;
    sv.values = std::move(values);
    sv.n_pairs = 1;
    return sv;
}

} // namespace

// ---------------------------------------------------------------------------
// ROC-AUC
// ---------------------------------------------------------------------------

TEST_CASE("roc_auc hand-counted values") {
    // pairs: .8>.6, .8>.2, .4<.6, .4>.2  ->  3 of 4
    CHECK(roc_auc({0.8, 0.4}, {0.6, 0.2}) == 0.75);
    CHECK(roc_auc({1.0, 0.9}, {0.1, 0.2}) == 1.0);
    CHECK(roc_auc({0.1, 0.2}, {1.0, 0.9}) == 0.0);
    CHECK(roc_auc({0.5}, {0.5}) == 0.5); // a tie counts half
    CHECK_THROWS_AS(roc_auc({}, {0.1}), EmptyInput);
    CHECK_THROWS_AS(roc_auc({0.1}, {}), EmptyInput);
}

TEST_CASE("roc_auc agrees with explicit pairwise counting") {
    Rng rng(71);
    for (int trial = 0; trial < 150; ++trial) {
        // a small discrete value set forces plenty of ties
        auto draw = [&](size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = 0.1 * static_cast<double>(rng.below(6));
            return v;
        };
        const auto pos = draw(1 + rng.below(7));
        const auto neg = draw(1 + rng.below(7));
        const double fast = roc_auc(pos, neg);
        const double slow = oracles::pairwise_auc(pos, neg);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        // swapping the classes complements the area
        CHECK(roc_auc(neg, pos) == doctest::Approx(1.0 - fast).epsilon(1e-12));
    }
}

TEST_CASE("roc_auc is invariant under monotone score transforms") {
    const std::vector<double> pos{0.9, 0.3, 0.3, 0.7};
    const std::vector<double> neg{0.1, 0.3, 0.5};
    const double base = roc_auc(pos, neg);
    auto mapped = [](const std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = std::exp(3.0 * v[i]) - 2.0;
        return out;
    };
    CHECK(roc_auc(mapped(pos), mapped(neg)) == doctest::Approx(base).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// layer probing
// ---------------------------------------------------------------------------

TEST_CASE("probing separable activations reaches perfect held-out AUC") {
    const Model model(small_cfg());
    // authentic replies all end with '!', neutral ones with '.': the final
    // byte dominates the last-token state, so classes are linearly separable
    std::vector<HistoryPair> pairs;
    for (int i = 0; i < 8; ++i) {
        const std::string tag = std::to_string(i);
        pairs.push_back({"q " + tag, "ans " + tag + "!",
                         std::string("ans ") + tag + "."});
    }
    const auto rep = probe_layers(model, pairs, {0, 1}, 0.25);
    CHECK(rep.n_train_pairs == 6);
    CHECK(rep.n_test_pairs == 2);
    CHECK(rep.skipped.empty());
    REQUIRE(rep.layers.size() == 2);
    for (const auto& pl : rep.layers) {
        CHECK(pl.n_samples == 16);
        CHECK(pl.auc == 1.0);
    }
    CHECK(rep.layers[0].layer == 0);
    CHECK(rep.layers[1].layer == 1);
}

TEST_CASE("probing indistinguishable classes sits at chance") {
    const Model model(small_cfg());
    std::vector<HistoryPair> pairs;
    for (int i = 0; i < 6; ++i) {
        const std::string reply = "same reply " + std::to_string(i);
        pairs.push_back({"q " + std::to_string(i), reply, reply});
    }
    const auto rep = probe_layers(model, pairs, {1}, 0.3);
    REQUIRE(rep.layers.size() == 1);
    // identical features give a zero classifier, all-tied scores, AUC 1/2
    CHECK(rep.layers[0].auc == 0.5);
}

TEST_CASE("probing costs two forward passes per pair and is seed-stable") {
    const Model model(small_cfg());
    std::vector<HistoryPair> pairs;
    for (int i = 0; i < 5; ++i)
        pairs.push_back({"in" + std::to_string(i), "out" + std::to_string(i) + "!",
                         std::string("neu") + std::to_string(i)});

    const uint64_t before = model.forward_passes();
    const auto rep1 = probe_layers(model, pairs, {0, 1}, 0.2, 7);
    CHECK(model.forward_passes() - before == 2 * pairs.size());

    const auto rep2 = probe_layers(model, pairs, {0, 1}, 0.2, 7);
    REQUIRE(rep1.layers.size() == rep2.layers.size());
    for (size_t i = 0; i < rep1.layers.size(); ++i)
        CHECK(rep1.layers[i].auc == rep2.layers[i].auc);
}

TEST_CASE("probe split arithmetic clamps to leave both sides non-empty") {
    const Model model(small_cfg());
    std::vector<HistoryPair> pairs;
    for (int i = 0; i < 4; ++i)
        pairs.push_back({"a" + std::to_string(i), "b!", std::string("c")});
    // 0.05 * 4 rounds to 0 but is clamped up to 1
    const auto low = probe_layers(model, pairs, {0}, 0.05);
    CHECK(low.n_test_pairs == 1);
    CHECK(low.n_train_pairs == 3);
    // 0.95 * 4 rounds to 4 but is clamped down to 3
    const auto high = probe_layers(model, pairs, {0}, 0.95);
    CHECK(high.n_test_pairs == 3);
    CHECK(high.n_train_pairs == 1);
}

TEST_CASE("probe validation and overflow skipping") {
    const Model model(small_cfg());
    std::vector<HistoryPair> pairs;
    for (int i = 0; i < 5; ++i)
        pairs.push_back({"q" + std::to_string(i), "y!", std::string("n")});

    CHECK_THROWS_AS(probe_layers(model, pairs, {}, 0.2), UsageError);
    CHECK_THROWS_AS(probe_layers(model, pairs, {0}, 0.0), ConfigInvalid);
    CHECK_THROWS_AS(probe_layers(model, pairs, {0}, 1.0), ConfigInvalid);
    CHECK_THROWS_AS(probe_layers(model, pairs, {5}, 0.2), LayerOutOfRange);

    std::vector<HistoryPair> few(pairs.begin(), pairs.begin() + 3);
    CHECK_THROWS_AS(probe_layers(model, few, {0}, 0.2), TooFewSamples);

    std::vector<HistoryPair> missing = pairs;
    missing[2].neutral.reset();
    CHECK_THROWS_AS(probe_layers(model, missing, {0}, 0.2), DataError);

    std::vector<HistoryPair> with_huge = pairs;
    with_huge.push_back({std::string(100, 'x'), "y!", std::string("n")});
    const auto rep = probe_layers(model, with_huge, {0}, 0.2);
    REQUIRE(rep.skipped.size() == 1);
    CHECK(rep.skipped[0].index == 5);
    CHECK(rep.layers[0].n_samples == 10); // five survivors, two samples each

    std::vector<HistoryPair> mostly_huge;
    for (int i = 0; i < 3; ++i) mostly_huge.push_back(pairs[static_cast<size_t>(i)]);
    mostly_huge.push_back({std::string(100, 'x'), "y!", std::string("n")});
    CHECK_THROWS_AS(probe_layers(model, mostly_huge, {0}, 0.2), TooFewSamples);
}

// ---------------------------------------------------------------------------
// BM25
// ---------------------------------------------------------------------------

TEST_CASE("bm25 matches hand-computed scores on a three-document corpus") {
    const Bm25 bm25({"cat sat", "cat cat runs", "dog runs"});
    REQUIRE(bm25.size() == 3);
    const double avg_len = 7.0 / 3.0;

    // df(cat)=2 -> idf = ln(1 + 1.5/2.5); doc0 tf=1, len=2
    {
        const double idf = std::log(1.0 + 1.5 / 2.5);
        const double denom = 1.0 + 1.2 * (0.25 + 0.75 * (2.0 / avg_len));
        CHECK(bm25.score("cat", 0) == doctest::Approx(idf * 2.2 / denom).epsilon(1e-12));
    }
    // doc1 tf=2, len=3
    {
        const double idf = std::log(1.0 + 1.5 / 2.5);
        const double denom = 2.0 + 1.2 * (0.25 + 0.75 * (3.0 / avg_len));
        CHECK(bm25.score("cat", 1) ==
              doctest::Approx(idf * 2.0 * 2.2 / denom).epsilon(1e-12));
    }
    // df(sat)=1 -> idf = ln(1 + 2.5/1.5); doc0 tf=1, len=2
    {
        const double idf = std::log(1.0 + 2.5 / 1.5);
        const double denom = 1.0 + 1.2 * (0.25 + 0.75 * (2.0 / avg_len));
        CHECK(bm25.score("sat", 0) == doctest::Approx(idf * 2.2 / denom).epsilon(1e-12));
    }

    // higher tf wins for the same term
    CHECK(bm25.score("cat", 1) > bm25.score("cat", 0));
    // absent term scores zero; a multi-term query sums per-term scores
    CHECK(bm25.score("cat", 2) == 0.0);
    CHECK(bm25.score("zebra", 0) == 0.0);
    CHECK(bm25.score("cat sat", 0) ==
          doctest::Approx(bm25.score("cat", 0) + bm25.score("sat", 0)).epsilon(1e-12));
    // repeated query terms accumulate (the query is a sequence, not a set)
    CHECK(bm25.score("cat cat", 0) ==
          doctest::Approx(2.0 * bm25.score("cat", 0)).epsilon(1e-12));

    CHECK_THROWS_AS(Bm25({}), EmptyInput);
}

// ---------------------------------------------------------------------------
// style-vs-semantic ranking
// ---------------------------------------------------------------------------

TEST_CASE("rank_history puts a self-styled item first") {
    const Model model(small_cfg());
    const std::vector<HistoryPair> pairs{
        {"q1", "totally different words", std::nullopt},
        {"q2", "short!", std::nullopt},
        {"q3", "medium sized reply", std::nullopt},
    };
    const int layer = 1;

    // style vector := the embedding of item 0's output, so item 0 scores 1
    const auto tr = model.forward_capture(lm_input(pairs[0].output), {layer});
    const auto row = tr.row(layer, tr.n_positions - 1);
    const StyleVector style =
        mk_style("u", std::vector<float>(row.begin(), row.end()), layer);

    const auto rep = rank_history(model, style, pairs, "medium reply");
    REQUIRE(rep.items.size() == 3);
    CHECK(rep.layer == layer);
    CHECK(rep.query == "medium reply");
    CHECK(rep.items[0].style_score == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.items[0].style_rank == 1);

    // BM25 favors the item containing the query terms
    CHECK(rep.items[2].semantic_rank == 1);

    // ranks are a permutation of 1..n for both orderings
    std::set<int> sranks, mranks;
    for (const auto& it : rep.items) {
        sranks.insert(it.style_rank);
        mranks.insert(it.semantic_rank);
    }
    CHECK(sranks == std::set<int>{1, 2, 3});
    CHECK(mranks == std::set<int>{1, 2, 3});
}

TEST_CASE("rank_history style scores ignore the vector's magnitude") {
    const Model model(small_cfg());
    const std::vector<HistoryPair> pairs{
        {"a", "first reply", std::nullopt},
        {"b", "second reply!", std::nullopt},
    };
    std::vector<float> v(8);
    Rng rng(5);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    const auto rep1 = rank_history(model, mk_style("u", v, 0), pairs, "reply");
    for (auto& x : v) x *= 4.0f;
    const auto rep2 = rank_history(model, mk_style("u", v, 0), pairs, "reply");
    for (size_t i = 0; i < rep1.items.size(); ++i) {
        CHECK(rep1.items[i].style_score ==
              doctest::Approx(rep2.items[i].style_score).epsilon(1e-12));
        CHECK(rep1.items[i].style_rank == rep2.items[i].style_rank);
    }
}

TEST_CASE("rank_history top tokens are the best-aligned positions") {
    const Model model(small_cfg());
    const std::vector<HistoryPair> pairs{{"q", "hi there", std::nullopt}};
    std::vector<float> v(8, 0.0f);
    v[3] = 1.0f;
    const StyleVector style = mk_style("u", v, 1);
    const auto rep = rank_history(model, style, pairs, "");
    REQUIRE(rep.items.size() == 1);
    const auto& toks = rep.items[0].top_tokens;
    REQUIRE(toks.size() == 5); // 9 positions, capped at 5

    // recompute every per-position cosine and compare against the report
    const auto tr = model.forward_capture(lm_input(pairs[0].output), {1});
    std::vector<double> cosines;
    for (int t = 0; t < tr.n_positions; ++t)
        cosines.push_back(cosine(tr.row(1, t), style.values));
    std::sort(cosines.rbegin(), cosines.rend());
    for (size_t i = 0; i < toks.size(); ++i)
        CHECK(toks[i].second == doctest::Approx(cosines[i]).epsilon(1e-12));

    // display form: BOS marker plus printable bytes
    bool saw_bos = false;
    for (const auto& [txt, score] : toks) saw_bos = saw_bos || txt == "<bos>";
    for (const auto& [txt, score] : toks)
        CHECK((txt == "<bos>" || txt.size() == 1 || txt.substr(0, 3) == "<0x"));
    (void)saw_bos;
}

TEST_CASE("rank_history validation") {
    const Model model(small_cfg());
    const StyleVector bad = mk_style("u", std::vector<float>(3, 1.0f), 0);
    const std::vector<HistoryPair> pairs{{"a", "b", std::nullopt}};
    CHECK_THROWS_AS(rank_history(model, bad, pairs, "q"), DimensionMismatch);
    const StyleVector ok = mk_style("u", std::vector<float>(8, 1.0f), 0);
    CHECK_THROWS_AS(rank_history(model, ok, {}, "q"), EmptyHistory);
}

// ---------------------------------------------------------------------------
// clustering
// ---------------------------------------------------------------------------

TEST_CASE("k=1 clustering returns the mean") {
    std::vector<StyleVector> styles{
        mk_style("a", {1.f, 0.f}),
        mk_style("b", {3.f, 2.f}),
        mk_style("c", {5.f, 4.f}),
    };
    const auto rep = cluster_users(styles, 1);
    REQUIRE(rep.centroids.size() == 1);
    CHECK(rep.centroids[0][0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.centroids[0][1] == doctest::Approx(2.0).epsilon(1e-6));
    for (const auto& [id, c] : rep.assignments) CHECK(c == 0);

    double expect = 0.0;
    for (const auto& s : styles) {
        const double dx = s.values[0] - 3.0, dy = s.values[1] - 2.0;
        expect += dx * dx + dy * dy;
    }
    CHECK(rep.objective == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("k=n clustering isolates every point") {
    std::vector<StyleVector> styles;
    for (int i = 0; i < 4; ++i)
        styles.push_back(mk_style("u" + std::to_string(i),
                                  {static_cast<float>(i * 2), static_cast<float>(-i)}));
    const auto rep = cluster_users(styles, 4);
    CHECK(rep.objective <= 1e-12);
    std::set<int> used;
    for (const auto& [id, c] : rep.assignments) used.insert(c);
    CHECK(used.size() == 4);
}

TEST_CASE("two separated blobs recover the exhaustive-search optimum") {
    Rng rng(83);
    std::vector<StyleVector> styles;
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 8; ++i) {
        const double cx = i < 4 ? 0.0 : 10.0;
        std::vector<float> v(3);
        v[0] = static_cast<float>(cx + 0.5 * rng.normal());
        v[1] = static_cast<float>(0.5 * rng.normal());
        v[2] = static_cast<float>(0.5 * rng.normal());
        styles.push_back(mk_style("u" + std::to_string(i), v));
        pts.push_back({v[0], v[1], v[2]});
    }
    const auto rep = cluster_users(styles, 2);
    const auto oracle = oracles::best_two_partition(pts);
    CHECK(rep.objective == doctest::Approx(oracle.cost).epsilon(1e-9));

    // same grouping up to label swap
    const int base = rep.assignments.at("u0");
    for (int i = 0; i < 8; ++i) {
        const int got = rep.assignments.at("u" + std::to_string(i));
        const bool same_as_u0 = got == base;
        const bool oracle_same = oracle.assign[static_cast<size_t>(i)] == oracle.assign[0];
        CHECK(same_as_u0 == oracle_same);
    }
}

TEST_CASE("clustering is deterministic for a fixed seed") {
    std::vector<StyleVector> styles;
    Rng rng(17);
    for (int i = 0; i < 6; ++i) {
        std::vector<float> v(4);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        styles.push_back(mk_style("u" + std::to_string(i), v));
    }
    const auto r1 = cluster_users(styles, 2, 9);
    const auto r2 = cluster_users(styles, 2, 9);
    CHECK(r1.assignments == r2.assignments);
    CHECK(r1.objective == r2.objective);
    CHECK(r1.centroids == r2.centroids);
}

TEST_CASE("projection is an isometry on intrinsically 2-D data") {
    // six points living in a 2-D subspace of R^5; top-2 PCA must preserve
    // their pairwise distances
    const std::vector<float> b1{0.6f, 0.0f, 0.8f, 0.0f, 0.0f};
    const std::vector<float> b2{0.0f, 1.0f, 0.0f, 0.0f, 0.0f};
    const std::vector<std::pair<double, double>> coords{
        {0, 0}, {5, 0}, {0, 1}, {5, 1}, {2.5, 0.5}, {1, 0.25}};
    std::vector<StyleVector> styles;
    for (size_t i = 0; i < coords.size(); ++i) {
        std::vector<float> v(5, 0.0f);
        for (size_t d = 0; d < 5; ++d)
            v[d] = static_cast<float>(coords[i].first * b1[d] +
                                      coords[i].second * b2[d]);
        styles.push_back(mk_style("u" + std::to_string(i), v));
    }
    const auto rep = cluster_users(styles, 2);
    REQUIRE(rep.projection.size() == styles.size());
    for (size_t i = 0; i < coords.size(); ++i)
        for (size_t j = i + 1; j < coords.size(); ++j) {
            const auto pi = rep.projection.at("u" + std::to_string(i));
            const auto pj = rep.projection.at("u" + std::to_string(j));
            const double dx = static_cast<double>(pi[0]) - pj[0];
            const double dy = static_cast<double>(pi[1]) - pj[1];
            const double proj_d = std::sqrt(dx * dx + dy * dy);
            const double ox = coords[i].first - coords[j].first;
            const double oy = coords[i].second - coords[j].second;
            const double orig_d = std::sqrt(ox * ox + oy * oy);
            CHECK(proj_d == doctest::Approx(orig_d).epsilon(1e-4));
        }
}

TEST_CASE("rank-1 data projects onto a flat second axis") {
    std::vector<StyleVector> styles;
    const std::vector<double> xs{-3.0, -1.0, 0.0, 2.0, 4.0};
    for (size_t i = 0; i < xs.size(); ++i) {
        std::vector<float> v(3, 0.0f);
        v[1] = static_cast<float>(xs[i]);
        styles.push_back(mk_style("u" + std::to_string(i), v));
    }
    const auto rep = cluster_users(styles, 1);
    for (size_t i = 0; i < xs.size(); ++i) {
        const auto p = rep.projection.at("u" + std::to_string(i));
        CHECK(p[1] == 0.0f);
    }
    // first axis reproduces the positions up to a global sign
    const auto p0 = rep.projection.at("u0");
    const double sign = p0[0] < 0 ? 1.0 : -1.0; // u0 sits at -3 - mean
    const double mean = (-3.0 - 1.0 + 0.0 + 2.0 + 4.0) / 5.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const auto p = rep.projection.at("u" + std::to_string(i));
        CHECK(sign * p[0] == doctest::Approx(xs[i] - mean).epsilon(1e-5));
    }
}

TEST_CASE("clustering validation") {
    std::vector<StyleVector> styles{
        mk_style("a", {1.f, 0.f}),
        mk_style("b", {0.f, 1.f}),
    };
    CHECK_THROWS_AS(cluster_users(styles, 0), UsageError);
    CHECK_THROWS_AS(cluster_users(styles, 3), TooFewUsers);

    auto mixed_dim = styles;
    mixed_dim[1].values.push_back(0.f);
    CHECK_THROWS_AS(cluster_users(mixed_dim, 1), DimensionMismatch);

    auto mixed_layer = styles;
    mixed_layer[1].layer = 1;
    CHECK_THROWS_AS(cluster_users(mixed_layer, 1), DataError);
}
