#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stylevec/extract.hpp"
#include "stylevec/metrics.hpp"
#include "stylevec/model.hpp"
#include "stylevec/steer.hpp"

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

StyleVector mk_style(std::vector<float> values, int layer) {
    StyleVector sv;
    sv.user_id = "u";
    sv.layer = layer;
    sv.method = ExtractMethod::MeanDiff;
    sv.values = std::move(values);
    sv.n_pairs = 1;
    return sv;
}

ActivationPair act_of(std::vector<float> a_n, std::vector<float> delta, int layer) {
    ActivationPair p;
    p.layer = layer;
    p.a_n = std::move(a_n);
    p.delta = std::move(delta);
    p.a_p.resize(p.a_n.size());
    for (size_t i = 0; i < p.a_n.size(); ++i) p.a_p[i] = p.a_n[i] + p.delta[i];
    return p;
}

} // namespace

TEST_CASE("position policy names round-trip") {
    for (auto p : {PositionPolicy::AllInput, PositionPolicy::LastInputToken,
                   PositionPolicy::GeneratedOnly})
        CHECK(parse_positions(to_string(p)) == p);
    CHECK_THROWS_AS(parse_positions("everywhere"), UsageError);
}

TEST_CASE("default intervention targets two-thirds depth") {
    ModelConfig cfg = small_cfg();
    cfg.n_layers = 6;
    cfg.d_model = 12;
    cfg.n_heads = 2;
    const auto iv = default_intervention(cfg);
    CHECK(iv.layer == 4);
    CHECK(iv.alpha == 2.0f);
    CHECK(iv.positions == PositionPolicy::GeneratedOnly);

    cfg.n_layers = 2;
    CHECK(default_intervention(cfg).layer == 1);
}

TEST_CASE("complete matches manual generate-and-decode") {
    const Model model(small_cfg());
    const std::string input = "say something";
    const std::string got = complete(model, input, 10);
    const TokenSeq raw = model.generate(lm_input(input + "\n"), 10);
    CHECK(got == textcodec::decode_lossy(raw));
}

TEST_CASE("steering with zero strength or a zero vector is the identity") {
    const Model model(small_cfg());
    const std::string input = "tell me about cats";
    const std::string plain = complete(model, input, 16);

    std::vector<float> v(8);
    for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) - 3.5f;
    const StyleVector style = mk_style(v, 1);

    for (auto pos : {PositionPolicy::AllInput, PositionPolicy::LastInputToken,
                     PositionPolicy::GeneratedOnly}) {
        CHECK(steer_generate(model, style, {1, 0.0f, pos}, input, 16) == plain);
        CHECK(steer_generate(model, mk_style(std::vector<float>(8, 0.0f), 1),
                             {1, 3.0f, pos}, input, 16) == plain);
    }
}

TEST_CASE("a strong vector actually changes the completion") {
    const Model model(small_cfg());
    const std::string input = "tell me about cats";
    const std::string plain = complete(model, input, 16);
    // not a constant vector: a uniform shift at the last layer would vanish
    // into the final layer norm's mean-centering
    std::vector<float> v(8);
    for (size_t i = 0; i < v.size(); ++i) v[i] = 5.0f * (static_cast<float>(i) - 3.5f);
    const StyleVector style = mk_style(v, 1);
    const std::string steered =
        steer_generate(model, style, {1, 4.0f, PositionPolicy::GeneratedOnly},
                       input, 16);
    CHECK(steered != plain);
}

TEST_CASE("steering warns when the layer differs from the vector's origin") {
    const Model model(small_cfg());
    const StyleVector style = mk_style(std::vector<float>(8, 0.1f), 0);

    std::ostringstream warn;
    steer_generate(model, style, {1, 1.0f, PositionPolicy::GeneratedOnly}, "hi",
                   4, &warn);
    CHECK(warn.str().find("warning") != std::string::npos);
    CHECK(warn.str().find("extraction layer 0") != std::string::npos);

    std::ostringstream quiet;
    steer_generate(model, style, {0, 1.0f, PositionPolicy::GeneratedOnly}, "hi",
                   4, &quiet);
    CHECK(quiet.str().empty());
}

TEST_CASE("steering validation") {
    const Model model(small_cfg());
    const StyleVector wrong_dim = mk_style(std::vector<float>(5, 1.0f), 0);
    CHECK_THROWS_AS(steer_generate(model, wrong_dim,
                                   {0, 1.0f, PositionPolicy::GeneratedOnly}, "x", 4),
                    DimensionMismatch);
    const StyleVector ok = mk_style(std::vector<float>(8, 1.0f), 0);
    CHECK_THROWS_AS(steer_generate(model, ok,
                                   {9, 1.0f, PositionPolicy::GeneratedOnly}, "x", 4),
                    LayerOutOfRange);
}

TEST_CASE("sweep scores a zero-strength column like the unsteered model") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles;
    styles.emplace("u", mk_style(std::vector<float>(8, 0.7f), 1));
    const std::vector<EvalCase> cases{
        {"u", "what is up", "not much"},
        {"u", "say hi", "hi"},
    };

    const auto rep = sweep(model, styles, cases, {0, 1}, {0.0f}, MetricId::RougeL, 8);
    REQUIRE(rep.cells.size() == 2);
    CHECK(rep.n_cases == 2);
    CHECK(rep.metric == MetricId::RougeL);
    CHECK(rep.max_new == 8);

    // alpha = 0 is the unsteered model, whatever the layer
    std::vector<Score> plain;
    for (const auto& c : cases)
        plain.push_back(rouge_l(complete(model, c.query, 8), c.reference));
    const double unsteered = corpus_mean(plain);
    for (const auto& cell : rep.cells) {
        CHECK(cell.valid);
        CHECK(cell.mean_score == doctest::Approx(unsteered).epsilon(1e-12));
    }
}

TEST_CASE("sweep grid order and tie-breaking") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles;
    styles.emplace("u", mk_style(std::vector<float>(8, 0.0f), 0)); // inert vector
    const std::vector<EvalCase> cases{{"u", "ping", "pong"}};

    const std::vector<int> layers{0, 1};
    const std::vector<float> alphas{-1.0f, 0.0f, 1.0f};
    const auto rep = sweep(model, styles, cases, layers, alphas, MetricId::RougeL, 6);
    REQUIRE(rep.cells.size() == 6);

    // layers-major, alphas-minor
    size_t i = 0;
    for (int l : layers)
        for (float a : alphas) {
            CHECK(rep.cells[i].layer == l);
            CHECK(rep.cells[i].alpha == a);
            ++i;
        }

    // every cell ties (the vector is zero), so the winner is the smallest
    // |alpha|, then the lowest layer
    const auto& best = rep.best();
    CHECK(best.alpha == 0.0f);
    CHECK(best.layer == 0);
    CHECK(rep.best_index == 1);
}

TEST_CASE("sweep records per-cell failures and keeps going") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles;
    styles.emplace("u", mk_style(std::vector<float>(8, 0.5f), 1));
    const std::vector<EvalCase> cases{{"u", "q", "r"}};

    const float bad = std::numeric_limits<float>::quiet_NaN();
    const auto rep = sweep(model, styles, cases, {1}, {0.0f, bad}, MetricId::RougeL, 4);
    REQUIRE(rep.cells.size() == 2);
    CHECK(rep.cells[0].valid);
    CHECK_FALSE(rep.cells[1].valid);
    CHECK_FALSE(rep.cells[1].error.empty());
    CHECK(rep.best_index == 0);
}

TEST_CASE("sweep with no usable cell reports failure") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles; // no vector for "ghost"
    const std::vector<EvalCase> cases{{"ghost", "q", "r"}};
    const auto rep = sweep(model, styles, cases, {0}, {1.0f}, MetricId::RougeL, 4);
    CHECK(rep.best_index == -1);
    CHECK_FALSE(rep.cells[0].valid);
    CHECK_THROWS_AS(rep.best(), NumericError);
}

TEST_CASE("sweep input validation") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles;
    styles.emplace("u", mk_style(std::vector<float>(8, 0.1f), 0));
    const std::vector<EvalCase> cases{{"u", "q", "r"}};
    CHECK_THROWS_AS(sweep(model, styles, cases, {}, {1.0f}, MetricId::RougeL),
                    UsageError);
    CHECK_THROWS_AS(sweep(model, styles, cases, {0}, {}, MetricId::RougeL),
                    UsageError);
    CHECK_THROWS_AS(sweep(model, styles, {}, {0}, {1.0f}, MetricId::RougeL),
                    EmptyInput);
    const std::vector<EvalCase> unlabeled{{"u", "q", ""}};
    CHECK_THROWS_AS(sweep(model, styles, unlabeled, {0}, {1.0f}, MetricId::RougeL),
                    DataError);
}

TEST_CASE("sweep is deterministic") {
    const Model model(small_cfg());
    std::map<std::string, StyleVector> styles;
    styles.emplace("u", mk_style(std::vector<float>(8, 0.9f), 1));
    const std::vector<EvalCase> cases{{"u", "hello there", "general"}};
    const auto r1 =
        sweep(model, styles, cases, {0, 1}, {-2.0f, 2.0f}, MetricId::MeteorLite, 8);
    const auto r2 =
        sweep(model, styles, cases, {0, 1}, {-2.0f, 2.0f}, MetricId::MeteorLite, 8);
    REQUIRE(r1.cells.size() == r2.cells.size());
    for (size_t i = 0; i < r1.cells.size(); ++i) {
        CHECK(r1.cells[i].mean_score == r2.cells[i].mean_score);
        CHECK(r1.cells[i].valid == r2.cells[i].valid);
    }
    CHECK(r1.best_index == r2.best_index);
}

TEST_CASE("ablation covers the full method-by-position grid in order") {
    const Model model(small_cfg());
    Rng rng(19);
    std::vector<ActivationPair> acts;
    for (int i = 0; i < 3; ++i) {
        std::vector<float> base(8), delta(8);
        for (size_t d = 0; d < 8; ++d) {
            base[d] = static_cast<float>(rng.normal());
            delta[d] = static_cast<float>(rng.normal());
        }
        acts.push_back(act_of(base, delta, 1));
    }
    const std::vector<std::string> queries{"first", "second"};

    size_t calls = 0;
    const auto rep = ablate(model, acts, queries, 1, 2.0f, 6,
                            [&](const std::vector<std::string>& outs) {
                                ++calls;
                                return static_cast<double>(outs.size());
                            });
    CHECK(rep.layer == 1);
    CHECK(rep.alpha == 2.0f);
    REQUIRE(rep.cells.size() == 9);
    CHECK(calls == 9);

    const ExtractMethod methods[] = {ExtractMethod::MeanDiff, ExtractMethod::LogReg,
                                     ExtractMethod::PCA};
    const PositionPolicy policies[] = {PositionPolicy::AllInput,
                                       PositionPolicy::LastInputToken,
                                       PositionPolicy::GeneratedOnly};
    size_t i = 0;
    for (auto m : methods)
        for (auto p : policies) {
            CHECK(rep.cells[i].method == m);
            CHECK(rep.cells[i].positions == p);
            CHECK(rep.cells[i].valid);
            CHECK(rep.cells[i].score == 2.0);
            ++i;
        }
}

TEST_CASE("ablation marks extraction failures without aborting the grid") {
    const Model model(small_cfg());
    // zero deltas: meandiff yields an inert vector, logreg and pca fail
    std::vector<ActivationPair> acts{
        act_of({1.f, 0.f, 2.f, -1.f, 0.f, 0.f, 1.f, 3.f}, std::vector<float>(8, 0.f), 1),
        act_of({0.f, 2.f, 1.f, 0.f, 1.f, -2.f, 0.f, 1.f}, std::vector<float>(8, 0.f), 1),
    };
    const std::vector<std::string> queries{"hello"};
    const std::string plain = complete(model, queries[0], 6);

    const auto rep = ablate(model, acts, queries, 1, 2.0f, 6,
                            [&](const std::vector<std::string>& outs) {
                                // inert steering must reproduce the plain output
                                CHECK(outs[0] == plain);
                                return 1.0;
                            });
    REQUIRE(rep.cells.size() == 9);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(rep.cells[i].valid); // meandiff row
        CHECK(rep.cells[i].score == 1.0);
    }
    for (size_t i = 3; i < 6; ++i) {
        CHECK_FALSE(rep.cells[i].valid); // logreg: coincident classes
        CHECK_FALSE(rep.cells[i].error.empty());
    }
    for (size_t i = 6; i < 9; ++i) {
        CHECK_FALSE(rep.cells[i].valid); // pca: zero variance
        CHECK_FALSE(rep.cells[i].error.empty());
    }
}
