#include <doctest.h>

#include <cmath>

#include "glie/rng.hpp"
#include "glie/scoring.hpp"
#include "support/oracles.hpp"

using namespace glie;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng rng, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.gaussian();
    return t;
}

HeadParams random_head(int hidden, int mlp_hidden, std::uint64_t seed) {
    Rng rng(seed);
    HeadParams p;
    p.w_t = random_tensor({hidden, 2 * hidden}, rng.split(0), 0.5);
    p.b_t = random_tensor({2 * hidden}, rng.split(1), 0.2);
    p.w_l = random_tensor({hidden, 2 * hidden}, rng.split(2), 0.5);
    p.b_l = random_tensor({2 * hidden}, rng.split(3), 0.2);
    p.w1 = random_tensor({3 * hidden, mlp_hidden}, rng.split(4), 0.4);
    p.b1 = random_tensor({mlp_hidden}, rng.split(5), 0.2);
    p.w2 = random_tensor({mlp_hidden, 3}, rng.split(6), 0.4);
    p.b2 = random_tensor({3}, rng.split(7), 0.2);
    return p;
}

} // namespace

TEST_SUITE("scoring-head") {

TEST_CASE("project with stacked identity weights duplicates each row") {
    const int hidden = 2;
    HeadParams p = random_head(hidden, 3 * hidden, 1);
    p.w_t.fill(0.0);
    p.b_t.fill(0.0);
    for (int k = 0; k < hidden; ++k) {
        p.w_t(k, k) = 1.0;
        p.w_t(k, hidden + k) = 1.0;
    }
    Tensor tokens = random_tensor({1, 3, hidden}, Rng(2));
    Tensor labels = random_tensor({1, 1, hidden}, Rng(3));
    Tensor t_proj, l_proj;
    project(tokens, labels, p, t_proj, l_proj);
    for (int l = 0; l < 3; ++l) {
        for (int k = 0; k < hidden; ++k) {
            CHECK(t_proj(0, l, k) == doctest::Approx(tokens(0, l, k)));
            CHECK(t_proj(0, l, hidden + k) == doctest::Approx(tokens(0, l, k)));
        }
    }
}

TEST_CASE("project with zero weights yields the bias everywhere") {
    const int hidden = 3;
    HeadParams p = random_head(hidden, 9, 4);
    p.w_t.fill(0.0);
    Tensor tokens = random_tensor({2, 4, hidden}, Rng(5));
    Tensor labels = random_tensor({2, 2, hidden}, Rng(6));
    Tensor t_proj, l_proj;
    project(tokens, labels, p, t_proj, l_proj);
    for (int b = 0; b < 2; ++b) {
        for (int l = 0; l < 4; ++l) {
            for (int j = 0; j < 2 * hidden; ++j) {
                CHECK(t_proj(b, l, j) == doctest::Approx(p.b_t(j)));
            }
        }
    }
}

TEST_CASE("projection shapes are B x L x 2H and B x C x 2H") {
    const int hidden = 4;
    HeadParams p = random_head(hidden, 12, 7);
    Tensor tokens = random_tensor({2, 5, hidden}, Rng(8));
    Tensor labels = random_tensor({2, 3, hidden}, Rng(9));
    Tensor t_proj, l_proj;
    project(tokens, labels, p, t_proj, l_proj);
    CHECK(t_proj.shape() == std::vector<int>{2, 5, 8});
    CHECK(l_proj.shape() == std::vector<int>{2, 3, 8});

    Tensor bad_labels = random_tensor({2, 3, hidden + 2}, Rng(10));
    Tensor a, b;
    CHECK_THROWS_AS(project(tokens, bad_labels, p, a, b), Error);
}

TEST_CASE("fuse emits B x L x C x 3H and zeroes the product lane with zero T'1") {
    const int hidden = 4;
    Tensor t_proj = random_tensor({2, 5, 2 * hidden}, Rng(11));
    Tensor l_proj = random_tensor({2, 3, 2 * hidden}, Rng(12));
    Tensor fused = fuse(t_proj, l_proj);
    CHECK(fused.shape() == std::vector<int>{2, 5, 3, 12});

    for (int b = 0; b < 2; ++b) {
        for (int l = 0; l < 5; ++l) {
            for (int k = hidden; k < 2 * hidden; ++k) {
                t_proj(b, l, k) = 0.0;
            }
        }
    }
    fused = fuse(t_proj, l_proj);
    for (int b = 0; b < 2; ++b) {
        for (int l = 0; l < 5; ++l) {
            for (int c = 0; c < 3; ++c) {
                for (int k = 2 * hidden; k < 3 * hidden; ++k) {
                    CHECK(fused(b, l, c, k) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("fuse at H=1 matches the hand-enumerated 2x2 grid") {
    // Two tokens and two labels, each projected row (x0, x1): the fused cell
    // must be (t0, l0, t1 * l1).
    Tensor t_proj({1, 2, 2});
    Tensor l_proj({1, 2, 2});
    t_proj(0, 0, 0) = 1.5;
    t_proj(0, 0, 1) = -2.0;
    t_proj(0, 1, 0) = 0.25;
    t_proj(0, 1, 1) = 4.0;
    l_proj(0, 0, 0) = 3.0;
    l_proj(0, 0, 1) = -1.0;
    l_proj(0, 1, 0) = -0.5;
    l_proj(0, 1, 1) = 2.0;
    Tensor fused = fuse(t_proj, l_proj);
    const double expected[2][2][3] = {
        {{1.5, 3.0, 2.0}, {1.5, -0.5, -4.0}},
        {{0.25, 3.0, -4.0}, {0.25, -0.5, 8.0}},
    };
    for (int l = 0; l < 2; ++l) {
        for (int c = 0; c < 2; ++c) {
            for (int k = 0; k < 3; ++k) {
                CHECK(fused(0, l, c, k) == doctest::Approx(expected[l][c][k]));
            }
        }
    }
}

TEST_CASE("mlp with zero weights is the output bias everywhere") {
    const int hidden = 2;
    HeadParams p = random_head(hidden, 6, 13);
    p.w1.fill(0.0);
    p.w2.fill(0.0);
    p.b2(0) = 0.1;
    p.b2(1) = -0.2;
    p.b2(2) = 0.3;
    Tensor fused = random_tensor({1, 4, 2, 3 * hidden}, Rng(14));
    Tensor scores = mlp_score(fused, p);
    CHECK(scores.shape() == std::vector<int>{1, 4, 2, 3});
    for (int l = 0; l < 4; ++l) {
        for (int c = 0; c < 2; ++c) {
            CHECK(scores(0, l, c, 0) == doctest::Approx(0.1));
            CHECK(scores(0, l, c, 1) == doctest::Approx(-0.2));
            CHECK(scores(0, l, c, 2) == doctest::Approx(0.3));
        }
    }
}

TEST_CASE("mlp matches a straight-line two-matrix reference at one position") {
    const int hidden = 3;
    const int mid = 5;
    HeadParams p = random_head(hidden, mid, 15);
    Tensor fused = random_tensor({1, 1, 1, 3 * hidden}, Rng(16));
    Tensor scores = mlp_score(fused, p);

    for (int ch = 0; ch < 3; ++ch) {
        double expected = p.b2(ch);
        for (int j = 0; j < mid; ++j) {
            double z = p.b1(j);
            for (int k = 0; k < 3 * hidden; ++k) {
                z += fused(0, 0, 0, k) * p.w1(k, j);
            }
            expected += std::max(z, 0.0) * p.w2(j, ch);
        }
        CHECK(scores(0, 0, 0, ch) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("shape chain lands on B x L x C x 3 across random sizes") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const int b = rng.uniform_int(1, 3);
        const int l = rng.uniform_int(1, 7);
        const int c = rng.uniform_int(0, 4);
        const int hidden = 2 * rng.uniform_int(1, 4);
        HeadParams p = random_head(hidden, 3 * hidden, 100 + static_cast<std::uint64_t>(trial));
        Tensor tokens = random_tensor({b, l, hidden}, rng.split(trial * 2));
        Tensor labels = random_tensor({b, c, hidden}, rng.split(trial * 2 + 1));
        Tensor scores = forward_scores(tokens, labels, p);
        CHECK(scores.shape() == std::vector<int>{b, l, c, 3});
    }
}

TEST_CASE("scores in one label column ignore the other labels") {
    const int hidden = 4;
    HeadParams p = random_head(hidden, 12, 18);
    Tensor tokens = random_tensor({1, 5, hidden}, Rng(19));
    Tensor labels = random_tensor({1, 3, hidden}, Rng(20));
    Tensor base = forward_scores(tokens, labels, p);

    Tensor tweaked = labels;
    for (int k = 0; k < hidden; ++k) {
        tweaked(0, 2, k) += 5.0;  // clobber label 2 only
    }
    Tensor changed = forward_scores(tokens, tweaked, p);
    for (int l = 0; l < 5; ++l) {
        for (int c = 0; c < 2; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                CHECK(base(0, l, c, ch) == changed(0, l, c, ch));
            }
        }
    }
}

TEST_CASE("head_backward with zero upstream gradient returns all zeros") {
    const int hidden = 4;
    HeadParams p = random_head(hidden, 12, 21);
    Tensor tokens = random_tensor({1, 3, hidden}, Rng(22));
    Tensor labels = random_tensor({1, 2, hidden}, Rng(23));
    HeadCache cache;
    forward_scores(tokens, labels, p, &cache);
    Tensor grad({1, 3, 2, 3});
    HeadGrads grads = head_backward(grad, cache, p);
    for (std::size_t i = 0; i < grads.params.w1.size(); ++i) CHECK(grads.params.w1[i] == 0.0);
    for (std::size_t i = 0; i < grads.d_tokens.size(); ++i) CHECK(grads.d_tokens[i] == 0.0);
}

TEST_CASE("head_backward demands a cache") {
    HeadParams p = random_head(2, 6, 24);
    HeadCache cache;
    Tensor grad({1, 1, 1, 3});
    try {
        head_backward(grad, cache, p);
        FAIL("expected MissingCache");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::missing_cache);
    }
}

TEST_CASE("head_backward matches a hand-differentiated scalar instance") {
    // H = 1, mlp_hidden = 1, B = L = C = 1, parameters kept positive so the
    // single ReLU is strictly active.
    HeadParams p;
    p.w_t = Tensor({1, 2});
    p.b_t = Tensor({2});
    p.w_l = Tensor({1, 2});
    p.b_l = Tensor({2});
    p.w1 = Tensor({3, 1});
    p.b1 = Tensor({1});
    p.w2 = Tensor({1, 3});
    p.b2 = Tensor({3});
    p.w_t(0, 0) = 0.7;
    p.w_t(0, 1) = 0.3;
    p.b_t(0) = 0.1;
    p.b_t(1) = 0.2;
    p.w_l(0, 0) = 0.6;
    p.w_l(0, 1) = 0.4;
    p.b_l(0) = 0.05;
    p.b_l(1) = 0.15;
    p.w1(0, 0) = 0.5;
    p.w1(1, 0) = 0.25;
    p.w1(2, 0) = 0.125;
    p.b1(0) = 0.3;
    p.w2(0, 0) = 0.9;
    p.w2(0, 1) = 0.8;
    p.w2(0, 2) = 0.7;

    const double tok = 1.1;
    const double lab = 0.9;
    Tensor tokens({1, 1, 1});
    Tensor labels({1, 1, 1});
    tokens(0, 0, 0) = tok;
    labels(0, 0, 0) = lab;

    HeadCache cache;
    forward_scores(tokens, labels, p, &cache);
    Tensor grad({1, 1, 1, 3});
    const double g0 = 0.2, g1 = -0.4, g2 = 0.6;
    grad(0, 0, 0, 0) = g0;
    grad(0, 0, 0, 1) = g1;
    grad(0, 0, 0, 2) = g2;
    HeadGrads grads = head_backward(grad, cache, p);

    // Forward quantities, recomputed symbolically.
    const double u0 = tok * p.w_t(0, 0) + p.b_t(0);
    const double u1 = tok * p.w_t(0, 1) + p.b_t(1);
    const double v0 = lab * p.w_l(0, 0) + p.b_l(0);
    const double v1 = lab * p.w_l(0, 1) + p.b_l(1);
    const double x0 = u0, x1 = v0, x2 = u1 * v1;
    const double z1 = x0 * p.w1(0, 0) + x1 * p.w1(1, 0) + x2 * p.w1(2, 0) + p.b1(0);
    REQUIRE(z1 > 0.0);
    const double a = z1;

    const double ds = g0 * p.w2(0, 0) + g1 * p.w2(0, 1) + g2 * p.w2(0, 2);
    const double dz1 = ds;  // ReLU active
    const double dx0 = dz1 * p.w1(0, 0);
    const double dx1 = dz1 * p.w1(1, 0);
    const double dx2 = dz1 * p.w1(2, 0);
    const double du0 = dx0, dv0 = dx1;
    const double du1 = dx2 * v1, dv1 = dx2 * u1;

    CHECK(grads.params.b2(0) == doctest::Approx(g0));
    CHECK(grads.params.w2(0, 1) == doctest::Approx(a * g1));
    CHECK(grads.params.b1(0) == doctest::Approx(dz1));
    CHECK(grads.params.w1(0, 0) == doctest::Approx(x0 * dz1));
    CHECK(grads.params.w1(2, 0) == doctest::Approx(x2 * dz1));
    CHECK(grads.params.w_t(0, 0) == doctest::Approx(tok * du0));
    CHECK(grads.params.w_t(0, 1) == doctest::Approx(tok * du1));
    CHECK(grads.params.b_t(0) == doctest::Approx(du0));
    CHECK(grads.params.w_l(0, 0) == doctest::Approx(lab * dv0));
    CHECK(grads.params.b_l(1) == doctest::Approx(dv1));
    CHECK(grads.d_tokens(0, 0, 0) ==
          doctest::Approx(du0 * p.w_t(0, 0) + du1 * p.w_t(0, 1)));
    CHECK(grads.d_labels(0, 0, 0) ==
          doctest::Approx(dv0 * p.w_l(0, 0) + dv1 * p.w_l(0, 1)));
}

TEST_CASE("head gradients match finite differences on random instances") {
    const int hidden = 4;
    const int mid = 3 * hidden;
    Rng seeds(77);
    for (int trial = 0; trial < 5; ++trial) {
        ModelParams params = ModelParams::init(hidden, mid, Rng(400 + trial));
        Tensor tokens = random_tensor({2, 4, hidden}, seeds.split(trial * 3));
        Tensor labels = random_tensor({2, 2, hidden}, seeds.split(trial * 3 + 1));
        Tensor upstream = random_tensor({2, 4, 2, 3}, seeds.split(trial * 3 + 2), 0.5);

        auto loss = [&]() {
            Tensor s = forward_scores(tokens, labels, params.head);
            double acc = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) acc += upstream[i] * s[i];
            return acc;
        };

        HeadCache cache;
        forward_scores(tokens, labels, params.head, &cache);
        HeadGrads analytic_head = head_backward(upstream, cache, params.head);
        ModelParams analytic = ModelParams::zeros(hidden, mid);
        analytic.head = std::move(analytic_head.params);

        ModelParams numeric = testing::finite_difference_grads(params, loss, 1e-5);
        CHECK(testing::max_relative_grad_error(analytic, numeric) < 1e-4);
    }
}

} // TEST_SUITE
