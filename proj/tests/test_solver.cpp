#include <doctest.h>

#include <cstdint>
#include <stdexcept>

#include "nlrt/datagen.hpp"
#include "nlrt/metrics.hpp"
#include "nlrt/rng.hpp"
#include "nlrt/solver.hpp"
#include "oracles.hpp"

using namespace nlrt;

TEST_CASE("feasible inputs are fixed points") {
    const Shape shape({8, 9, 7});
    const RankVector ranks{{3, 2, 4}};
    const DenseTensor a = feasible_point(shape, ranks, 41);
    SolverConfig cfg;
    cfg.ranks = ranks;
    const SolverResult res = nlrt_approximate(a, cfg);
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    CHECK(rel_error(res.approximation, a) <= 1e-8);
}

TEST_CASE("noise-free low-rank tensor is recovered") {
    const Shape shape({20, 20, 20});
    const RankVector ranks{{3, 3, 3}};
    const DenseTensor a = case1_ground_truth(shape, ranks, 7);
    SolverConfig cfg;
    cfg.ranks = ranks;
    const SolverResult res = nlrt_approximate(a, cfg);
    CHECK(rel_error(res.approximation, a) <= 1e-3);
    CHECK(res.converged);
}

TEST_CASE("result invariants: nonnegative output, mode ranks, finite trace") {
    const Shape shape({10, 12, 8});
    const DenseTensor truth = case1_ground_truth(shape, RankVector{{2, 3, 2}}, 42);
    const DenseTensor noisy = add_noise_snr(truth, 30.0, 43);
    SolverConfig cfg;
    cfg.ranks = RankVector{{2, 3, 2}};
    const SolverResult res = nlrt_approximate(noisy, cfg);

    for (double v : res.approximation.values()) CHECK(v >= 0.0);
    REQUIRE(res.mode_factors.size() == 3);
    CHECK(res.mode_factors[0].rank == 2);
    CHECK(res.mode_factors[1].rank == 3);
    CHECK(res.mode_factors[2].rank == 2);
    REQUIRE(!res.trace.entries.empty());
    for (const TraceEntry& e : res.trace.entries) {
        CHECK(e.rel_change >= 0.0);
        CHECK(e.inter_set_distance >= 0.0);
        CHECK(e.objective >= 0.0);
    }
}

TEST_CASE("inter-set distance is nonincreasing") {
    const Shape shape({12, 10, 9});
    const DenseTensor truth = case1_ground_truth(shape, RankVector{{3, 3, 3}}, 44);
    const DenseTensor noisy = add_noise_snr(truth, 20.0, 45);
    SolverConfig cfg;
    cfg.ranks = RankVector{{3, 3, 3}};
    const SolverResult res = nlrt_approximate(noisy, cfg);
    const double d1 = res.trace.entries.front().inter_set_distance;
    for (std::size_t i = 1; i < res.trace.entries.size(); ++i) {
        CHECK(res.trace.entries[i].inter_set_distance <=
              res.trace.entries[i - 1].inter_set_distance + 1e-10 * d1);
    }
}

TEST_CASE("solver is deterministic across thread counts") {
    const Shape shape({10, 10, 10});
    const DenseTensor truth = case1_ground_truth(shape, RankVector{{2, 2, 2}}, 46);
    const DenseTensor noisy = add_noise_snr(truth, 25.0, 47);
    SolverConfig cfg;
    cfg.ranks = RankVector{{2, 2, 2}};
    cfg.threads = 1;
    const SolverResult one = nlrt_approximate(noisy, cfg);
    cfg.threads = 8;
    const SolverResult many = nlrt_approximate(noisy, cfg);
    CHECK(one.iterations == many.iterations);
    CHECK(oracle::max_abs_diff(one.approximation, many.approximation) == 0.0);
}

TEST_CASE("solver rejects bad inputs") {
    const DenseTensor neg(Shape({2, 2}), {1.0, -0.5, 0.0, 2.0});
    SolverConfig cfg;
    cfg.ranks = RankVector{{1, 1}};
    CHECK_THROWS_AS(nlrt_approximate(neg, cfg), std::invalid_argument);

    const DenseTensor ok(Shape({2, 2}), {1.0, 0.5, 0.0, 2.0});
    cfg.ranks = RankVector{{3, 1}};
    CHECK_THROWS_AS(nlrt_approximate(ok, cfg), std::invalid_argument);
    cfg.ranks = RankVector{{1, 1}};
    cfg.tol = 0.0;
    CHECK_THROWS_AS(nlrt_approximate(ok, cfg), std::invalid_argument);
}

TEST_CASE("tiny negative noise within tolerance is accepted") {
    const DenseTensor a(Shape({2, 2}), {1.0, -1e-13, 0.5, 2.0});
    SolverConfig cfg;
    cfg.ranks = RankVector{{1, 1}};
    const SolverResult res = nlrt_approximate(a, cfg);
    for (double v : res.approximation.values()) CHECK(v >= 0.0);
}

TEST_CASE("max_iters exhaustion reports converged=false") {
    const Shape shape({10, 10, 10});
    const DenseTensor truth = case1_ground_truth(shape, RankVector{{3, 3, 3}}, 48);
    const DenseTensor noisy = add_noise_snr(truth, 10.0, 49);
    SolverConfig cfg;
    cfg.ranks = RankVector{{3, 3, 3}};
    cfg.max_iters = 2;
    const SolverResult res = nlrt_approximate(noisy, cfg);
    CHECK(!res.converged);
    CHECK(res.iterations == 2);
    for (double v : res.approximation.values()) CHECK(v >= 0.0);
}

TEST_CASE("flops_estimate formula and saturation") {
    CHECK(flops_estimate(Shape({100, 100, 100}), RankVector{{5, 5, 5}}).value == 15000000);
    CHECK(flops_estimate(Shape({2, 2}), RankVector{{1, 1}}).value == 8);
    CHECK(flops_estimate(Shape({30, 30, 30, 30, 30}), RankVector{{2, 2, 2, 2, 2}}).value ==
          243000000);
    CHECK(!flops_estimate(Shape({100, 100, 100}), RankVector{{5, 5, 5}}).saturated);

    // 2^21 per mode over three modes overflows 64 bits once multiplied by the
    // rank sum.
    const std::size_t big = 1ull << 21;
    const FlopsEstimate sat =
        flops_estimate(Shape({big, big, big}), RankVector{{1000, 1000, 1000}});
    CHECK(sat.saturated);
    CHECK(sat.value == UINT64_MAX);
}
