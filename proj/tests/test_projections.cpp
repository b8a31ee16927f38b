#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nlrt/projections.hpp"
#include "nlrt/rng.hpp"
#include "oracles.hpp"

using namespace nlrt;

TEST_CASE("project_nonneg clips negatives and fixes nonnegative input") {
    const DenseTensor t(Shape({2, 2}), {1, 3, -2, 0});
    const DenseTensor out = project_nonneg(t);
    CHECK(out.value(0) == 1);
    CHECK(out.value(1) == 3);
    CHECK(out.value(2) == 0);
    CHECK(out.value(3) == 0);

    SplitMix64 rng(31);
    const DenseTensor nonneg = oracle::random_tensor(Shape({3, 4}), rng);
    CHECK(oracle::max_abs_diff(project_nonneg(nonneg), nonneg) == 0.0);
}

TEST_CASE("project_nonneg is the nearest nonnegative point") {
    SplitMix64 rng(32);
    const DenseTensor t = oracle::random_tensor(Shape({3, 3, 2}), rng, true);
    const DenseTensor p = project_nonneg(t);
    for (std::size_t i = 0; i < t.num_elements(); ++i) {
        CHECK(p.value(i) == std::max(t.value(i), 0.0));
    }
    double base = 0.0;
    for (std::size_t i = 0; i < t.num_elements(); ++i) {
        const double d = t.value(i) - p.value(i);
        base += d * d;
    }
    for (int candidate = 0; candidate < 1000; ++candidate) {
        const DenseTensor w = oracle::random_tensor(t.shape(), rng);
        double alt = 0.0;
        for (std::size_t i = 0; i < t.num_elements(); ++i) {
            const double d = t.value(i) - w.value(i);
            alt += d * d;
        }
        CHECK(base <= alt + 1e-12);
    }
}

TEST_CASE("project_nonneg is idempotent and nonexpansive") {
    SplitMix64 rng(33);
    const DenseTensor a = oracle::random_tensor(Shape({4, 5}), rng, true);
    const DenseTensor b = oracle::random_tensor(Shape({4, 5}), rng, true);
    CHECK(oracle::max_abs_diff(project_nonneg(project_nonneg(a)), project_nonneg(a)) == 0.0);

    auto dist = [](const DenseTensor& x, const DenseTensor& y) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.num_elements(); ++i) {
            const double d = x.value(i) - y.value(i);
            acc += d * d;
        }
        return std::sqrt(acc);
    };
    CHECK(dist(project_nonneg(a), project_nonneg(b)) <= dist(a, b) + 1e-14);
}

TEST_CASE("project_mode_k fixed points and truncation residual") {
    SplitMix64 rng(34);
    // Build a tensor whose mode-1 unfolding has rank 2 exactly.
    const Shape shape({4, 5, 3});
    const Matrix u = oracle::random_matrix(5, 2, rng);
    const Matrix coeff = oracle::random_matrix(2, 12, rng);
    const DenseTensor low = fold(matmul(u, coeff), 1, shape);
    const ModeProjection fixed = project_mode_k(low, 1, 2);
    CHECK(fro_norm(low) > 0.0);
    CHECK(oracle::max_abs_diff(fixed.tensor, low) <= 1e-9 * fro_norm(low));

    const DenseTensor t = oracle::random_tensor(Shape({5, 6, 7}), rng, true);
    const ModeProjection full = project_mode_k(t, 1, 6);
    CHECK(oracle::max_abs_diff(full.tensor, t) <= 1e-10 * fro_norm(t));

    const ModeProjection trunc = project_mode_k(t, 1, 2);
    const oracle::FullSvd ref = oracle::full_svd(unfold(t, 1));
    double acc = 0.0;
    for (std::size_t i = 0; i < t.num_elements(); ++i) {
        const double d = t.value(i) - trunc.tensor.value(i);
        acc += d * d;
    }
    CHECK(std::sqrt(acc) ==
          doctest::Approx(oracle::tail_residual(ref.sigmas, 2)).epsilon(1e-8));
    CHECK(trunc.factors.rank == 2);
    CHECK_THROWS_AS(project_mode_k(t, 1, 7), std::invalid_argument);
}

TEST_CASE("project_mode_k is idempotent") {
    SplitMix64 rng(35);
    const DenseTensor t = oracle::random_tensor(Shape({4, 6, 5}), rng, true);
    const ModeProjection once = project_mode_k(t, 2, 2);
    const ModeProjection twice = project_mode_k(once.tensor, 2, 2);
    CHECK(oracle::max_abs_diff(twice.tensor, once.tensor) <= 1e-9 * fro_norm(once.tensor));
}

TEST_CASE("project_omega1 fixed point, scalar example, and oracle") {
    const DenseTensor two(Shape({1}), {2.0});
    const DenseTensor minus_two(Shape({1}), {-2.0});
    const ProductPoint p{{two, minus_two}};
    const ProductPoint out = project_omega1(p);
    REQUIRE(out.parts.size() == 2);
    CHECK(out.parts[0].value(0) == 1.0);
    CHECK(out.parts[1].value(0) == 1.0);

    SplitMix64 rng(36);
    const DenseTensor common = oracle::random_tensor(Shape({3, 4}), rng);
    const ProductPoint fixed = project_omega1(ProductPoint{{common, common}});
    CHECK(oracle::max_abs_diff(fixed.parts[0], common) == 0.0);
    CHECK(oracle::max_abs_diff(fixed.parts[1], common) == 0.0);

    ProductPoint q;
    for (int i = 0; i < 3; ++i) {
        q.parts.push_back(oracle::random_tensor(Shape({2, 3, 2}), rng, true));
    }
    const ProductPoint r = project_omega1(q);
    for (std::size_t i = 0; i < r.parts[0].num_elements(); ++i) {
        double mean = 0.0;
        for (const DenseTensor& part : q.parts) mean += std::max(part.value(i), 0.0);
        mean /= 3.0;
        CHECK(r.parts[0].value(i) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(r.parts[1].value(i) == r.parts[0].value(i));
        CHECK(r.parts[2].value(i) == r.parts[0].value(i));
        CHECK(r.parts[0].value(i) >= 0.0);
    }
    CHECK_THROWS_AS(
        project_omega1(ProductPoint{{common, oracle::random_tensor(Shape({2, 2}), rng)}}),
        std::invalid_argument);
}

TEST_CASE("project_omega2 fixed points and per-mode oracle") {
    SplitMix64 rng(37);
    // Multilinear rank (2,2,2) tensor: random core times random factors.
    const Shape shape({4, 5, 6});
    DenseTensor core = oracle::random_tensor(Shape({2, 2, 2}), rng);
    DenseTensor low = core;
    for (std::size_t k = 0; k < 3; ++k) {
        low = mode_product(low, oracle::random_matrix(shape.dim(k), 2, rng), k);
    }
    const RankVector ranks{{2, 2, 2}};
    const Omega2Projection fixed = project_omega2(low, ranks);
    for (const DenseTensor& part : fixed.point.parts) {
        CHECK(oracle::max_abs_diff(part, low) <= 1e-9 * fro_norm(low));
    }

    const DenseTensor t = oracle::random_tensor(shape, rng);
    const Omega2Projection full = project_omega2(t, RankVector{{4, 5, 6}});
    for (const DenseTensor& part : full.point.parts) {
        CHECK(oracle::max_abs_diff(part, t) <= 1e-10 * fro_norm(t));
    }

    const Omega2Projection proj = project_omega2(t, ranks);
    REQUIRE(proj.factors.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const ModeProjection ref = project_mode_k(t, k, 2);
        CHECK(oracle::max_abs_diff(proj.point.parts[k], ref.tensor) == 0.0);
        CHECK(proj.factors[k].rank == 2);
        // Truncation leaves numerical mode-k rank <= r_k.
        const oracle::FullSvd check = oracle::full_svd(unfold(proj.point.parts[k], k));
        CHECK(check.sigmas[2] <= 1e-9 * check.sigmas[0]);
    }
}

TEST_CASE("project_omega2 is thread-count invariant") {
    SplitMix64 rng(38);
    const DenseTensor t = oracle::random_tensor(Shape({6, 7, 8}), rng);
    const RankVector ranks{{3, 2, 4}};
    const Omega2Projection one = project_omega2(t, ranks, 1);
    const Omega2Projection many = project_omega2(t, ranks, 8);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(oracle::max_abs_diff(one.point.parts[k], many.point.parts[k]) == 0.0);
    }
}

TEST_CASE("general omega2 variant projects each part independently") {
    SplitMix64 rng(39);
    ProductPoint p;
    for (int i = 0; i < 3; ++i) {
        p.parts.push_back(oracle::random_tensor(Shape({4, 4, 4}), rng));
    }
    const RankVector ranks{{2, 2, 2}};
    const Omega2Projection out = project_omega2_general(p, ranks);
    for (std::size_t k = 0; k < 3; ++k) {
        const ModeProjection ref = project_mode_k(p.parts[k], k, 2);
        CHECK(oracle::max_abs_diff(out.point.parts[k], ref.tensor) == 0.0);
    }
}

TEST_CASE("rank vector validation") {
    const Shape shape({4, 5, 6});
    CHECK_THROWS_AS((RankVector{{2, 2}}.validate(shape)), std::invalid_argument);
    CHECK_THROWS_AS((RankVector{{0, 2, 2}}.validate(shape)), std::invalid_argument);
    CHECK_THROWS_AS((RankVector{{5, 2, 2}}.validate(shape)), std::invalid_argument);
    const RankVector ok{{4, 5, 6}};
    ok.validate(shape);
    CHECK(ok.sum() == 15);
    CHECK(ok.product() == 120);
    CHECK(ok.max() == 6);
}
