#include "doctest.h"

#include <cmath>
#include <vector>

#include "gear/ernet.hpp"
#include "gear/error.hpp"
#include "oracles.hpp"

using namespace gear;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.uniform(lo, hi);
    return m;
}

ErNetLayerParams random_layer(Rng& rng, std::size_t f, std::size_t h) {
    return {Parameter("w0", random_matrix(rng, h, 2 * f)), Parameter("w1", random_matrix(rng, 1, h))};
}

std::vector<Var> leaves(Tape& t, const std::vector<Matrix>& hs) {
    std::vector<Var> out;
    for (const Matrix& m : hs) out.push_back(t.constant(m));
    return out;
}

} // namespace

TEST_SUITE("ernet") {

TEST_CASE("zero W0 gives zero logits") {
    Rng rng(1);
    ErNetLayerParams layer{Parameter("w0", Matrix(3, 4)), Parameter("w1", random_matrix(rng, 1, 3))};
    Tape t;
    const BoundErNetLayer b = bind(t, layer);
    for (int k = 0; k < 5; ++k) {
        Var hi = t.constant(random_matrix(rng, 2, 1));
        Var hj = t.constant(random_matrix(rng, 2, 1));
        CHECK(attention_logit(b, hi, hj).scalar() == 0.0);
    }
}

TEST_CASE("hand-evaluated logit") {
    ErNetLayerParams layer{Parameter("w0", Matrix{{1, 0}, {0, 1}}), Parameter("w1", Matrix{{1, 1}})};
    Tape t;
    const BoundErNetLayer b = bind(t, layer);
    CHECK(attention_logit(b, t.constant(Matrix{{1}}), t.constant(Matrix{{2}})).scalar() == 3.0);
    // p_ij and p_ji use different halves of W0
    ErNetLayerParams asym{Parameter("w0", Matrix{{1, 0}}), Parameter("w1", Matrix{{1}})};
    const BoundErNetLayer a = bind(t, asym);
    CHECK(attention_logit(a, t.constant(Matrix{{1}}), t.constant(Matrix{{2}})).scalar() == 1.0);
    CHECK(attention_logit(a, t.constant(Matrix{{2}}), t.constant(Matrix{{1}})).scalar() == 2.0);
    CHECK_THROWS_AS(attention_logit(b, t.constant(Matrix{{1}, {2}}), t.constant(Matrix{{2}})), DimensionError);
}

TEST_CASE("single node is a fixed point") {
    Rng rng(2);
    ErNetLayerParams layer = random_layer(rng, 4, 3);
    Tape t;
    const BoundErNetLayer b = bind(t, layer);
    const Matrix h = random_matrix(rng, 4, 1);
    const std::vector<Var> in{t.constant(h)};
    const LayerOutput out = propagate_layer(b, in);
    CHECK(out.attention(0, 0) == 1.0);
    CHECK(out.states[0].value() == h);
}

TEST_CASE("identical states stay identical") {
    Rng rng(3);
    ErNetLayerParams layer = random_layer(rng, 3, 5);
    Tape t;
    const BoundErNetLayer b = bind(t, layer);
    const Matrix v = random_matrix(rng, 3, 1);
    const std::vector<Var> in = leaves(t, {v, v, v, v});
    const LayerOutput out = propagate_layer(b, in);
    for (const Var& s : out.states) CHECK(max_abs_diff(s.value(), v) <= 1e-15);
}

TEST_CASE("layer matches the straight-line oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t f = 1 + rng.below(6), h = 1 + rng.below(6), n = 1 + rng.below(5);
        ErNetLayerParams layer = random_layer(rng, f, h);
        std::vector<Matrix> hs;
        std::vector<oracle::Vec> ohs;
        for (std::size_t i = 0; i < n; ++i) {
            hs.push_back(random_matrix(rng, f, 1));
            ohs.push_back(oracle::to_vec(hs.back()));
        }
        Tape t;
        const LayerOutput out = propagate_layer(bind(t, layer), leaves(t, hs));
        const oracle::LayerResult ref =
            oracle::ernet_layer(oracle::to_mat(layer.w0.value), oracle::to_mat(layer.w1.value), ohs);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < f; ++k) CHECK(std::abs(out.states[i].value()[k] - ref.states[i][k]) <= 1e-12);
            for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(out.attention(i, j) - ref.attention[i][j]) <= 1e-12);
        }
    }
}

TEST_CASE("attention rows are distributions and outputs stay in the hull") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t f = 2 + rng.below(4), n = 2 + rng.below(4);
        ErNetLayerParams layer = random_layer(rng, f, 4);
        std::vector<Matrix> hs;
        for (std::size_t i = 0; i < n; ++i) hs.push_back(random_matrix(rng, f, 1));
        Tape t;
        const LayerOutput out = propagate_layer(bind(t, layer), leaves(t, hs));
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0;
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(out.attention(i, j) > 0.0);
                sum += out.attention(i, j);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            // per-coordinate bounds of the convex hull
            for (std::size_t k = 0; k < f; ++k) {
                double lo = hs[0][k], hi = hs[0][k];
                for (const Matrix& m : hs) lo = std::min(lo, m[k]), hi = std::max(hi, m[k]);
                CHECK(out.states[i].value()[k] >= lo - 1e-12);
                CHECK(out.states[i].value()[k] <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("permuting nodes permutes states and attention") {
    Rng rng(6);
    const std::size_t f = 3, n = 4;
    std::vector<ErNetLayerParams> params{random_layer(rng, f, 4), random_layer(rng, f, 4)};
    const ErNetConfig cfg{f, 4, 2, 3};
    HiddenStates init;
    for (std::size_t i = 0; i < n; ++i) init.states.push_back(random_matrix(rng, f, 1));
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    HiddenStates permuted;
    for (std::size_t i = 0; i < n; ++i) permuted.states.push_back(init.states[perm[i]]);
    const auto [a, att_a] = run_ernet(cfg, params, init);
    const auto [b, att_b] = run_ernet(cfg, params, permuted);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(max_abs_diff(b.states[i], a.states[perm[i]]) <= 1e-12);
        for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(std::abs(att_b[l](i, j) - att_a[l](perm[i], perm[j])) <= 1e-12);
    }
}

TEST_CASE("T=0 and single-node stacks are the identity") {
    Rng rng(7);
    HiddenStates init;
    for (int i = 0; i < 3; ++i) init.states.push_back(random_matrix(rng, 4, 1));
    std::vector<ErNetLayerParams> none;
    const auto [out0, att0] = run_ernet(ErNetConfig{4, 3, 0, 3}, none, init);
    CHECK(out0.states == init.states);
    CHECK(att0.empty());

    std::vector<ErNetLayerParams> two{random_layer(rng, 4, 3), random_layer(rng, 4, 3)};
    HiddenStates single;
    single.states.push_back(init.states[0]);
    const auto [out2, att2] = run_ernet(ErNetConfig{4, 3, 2, 3}, two, single);
    CHECK(out2.states == single.states);
    CHECK(att2.size() == 2);
}

TEST_CASE("T=1 equals one manual propagate_layer") {
    Rng rng(8);
    std::vector<ErNetLayerParams> one{random_layer(rng, 3, 2)};
    HiddenStates init;
    for (int i = 0; i < 3; ++i) init.states.push_back(random_matrix(rng, 3, 1));
    const auto [out, att] = run_ernet(ErNetConfig{3, 2, 1, 3}, one, init);
    Tape t;
    const LayerOutput manual = propagate_layer(bind(t, one[0]), leaves(t, init.states));
    for (std::size_t i = 0; i < 3; ++i) CHECK(out.states[i] == manual.states[i].value());
    CHECK(att[0] == manual.attention);
}

TEST_CASE("errors") {
    Rng rng(9);
    std::vector<ErNetLayerParams> one{random_layer(rng, 2, 2)};
    HiddenStates empty;
    CHECK_THROWS_AS(run_ernet(ErNetConfig{2, 2, 1, 3}, one, empty), EmptyAggregationError);
    HiddenStates init;
    init.states.push_back(random_matrix(rng, 2, 1));
    CHECK_THROWS_AS(run_ernet(ErNetConfig{2, 2, 2, 3}, one, init), ConfigError);
    Tape t;
    CHECK_THROWS_AS(propagate_layer(bind(t, one[0]), std::vector<Var>{}), EmptyAggregationError);
}

}
