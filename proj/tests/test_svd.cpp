#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nlrt/rng.hpp"
#include "nlrt/svd.hpp"
#include "oracles.hpp"

using namespace nlrt;

TEST_CASE("gram_eigs on identity and zeros") {
    const SymEig id = gram_eigs(Matrix::identity(3));
    for (double v : id.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    const SymEig zero = gram_eigs(Matrix(4, 7));
    for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("gram_eigs eigenvalues are squared singular values") {
    SplitMix64 rng(21);
    const Matrix m = oracle::random_matrix(5, 30, rng, true);
    const SymEig eig = gram_eigs(m);
    const oracle::FullSvd ref = oracle::full_svd(m);
    REQUIRE(eig.values.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(eig.values[i] ==
              doctest::Approx(ref.sigmas[i] * ref.sigmas[i]).epsilon(1e-8));
    }
}

TEST_CASE("truncated_svd on diag(3,1) with r=1") {
    Matrix m(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    const SvdTriplets svd = truncated_svd(m, 1);
    REQUIRE(svd.rank == 1);
    CHECK(svd.sigmas[0] == doctest::Approx(3.0).epsilon(1e-12));
    const Matrix rec = reconstruct(svd);
    CHECK(rec(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(rec(0, 1)) < 1e-12);
    CHECK(std::abs(rec(1, 0)) < 1e-12);
    CHECK(std::abs(rec(1, 1)) < 1e-12);
}

TEST_CASE("rank-1 input is reconstructed exactly at r=1") {
    SplitMix64 rng(22);
    Matrix a(6, 1), b(9, 1);
    for (std::size_t i = 0; i < 6; ++i) a(i, 0) = rng.uniform() * 2.0 - 1.0;
    for (std::size_t i = 0; i < 9; ++i) b(i, 0) = rng.uniform() * 2.0 - 1.0;
    const Matrix m = matmul(a, b.transposed());
    const SvdTriplets svd = truncated_svd(m, 1);
    CHECK(oracle::max_abs_diff(reconstruct(svd), m) <= 1e-10 * fro_norm(m));
}

TEST_CASE("truncated_svd matches the one-sided Jacobi oracle") {
    SplitMix64 rng(23);
    const Matrix m = oracle::random_matrix(6, 40, rng, true);
    const SvdTriplets svd = truncated_svd(m, 3);
    const oracle::FullSvd ref = oracle::full_svd(m);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(svd.sigmas[i] == doctest::Approx(ref.sigmas[i]).epsilon(1e-8));
    }
    // Residual identity from the tail singular values.
    Matrix diff = m;
    const Matrix rec = reconstruct(svd);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] -= rec.data()[i];
    CHECK(fro_norm(diff) ==
          doctest::Approx(oracle::tail_residual(ref.sigmas, 3)).epsilon(1e-9));
}

TEST_CASE("factor orthonormality and sign convention") {
    SplitMix64 rng(24);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t rows = 3 + static_cast<std::size_t>(rng.next() % 5);
        const std::size_t cols = 8 + static_cast<std::size_t>(rng.next() % 20);
        const Matrix m = oracle::random_matrix(rows, cols, rng, true);
        const SvdTriplets svd = truncated_svd(m, rows);
        CHECK(oracle::orthonormality_defect(svd.left) < 1e-10);
        CHECK(oracle::orthonormality_defect(svd.right) < 1e-10);
        for (std::size_t j = 0; j < svd.rank; ++j) {
            double best = 0.0;
            for (std::size_t i = 0; i < svd.left.rows(); ++i) {
                if (std::abs(svd.left(i, j)) > std::abs(best)) best = svd.left(i, j);
            }
            CHECK(best >= 0.0);
        }
        for (std::size_t i = 1; i < svd.rank; ++i) {
            CHECK(svd.sigmas[i] <= svd.sigmas[i - 1]);
            CHECK(svd.sigmas[i] >= 0.0);
        }
    }
}

TEST_CASE("transpose symmetry of singular values") {
    SplitMix64 rng(25);
    const Matrix m = oracle::random_matrix(7, 15, rng, true);
    const SvdTriplets a = truncated_svd(m, 7);
    const SvdTriplets b = truncated_svd(m.transposed(), 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(a.sigmas[i] == doctest::Approx(b.sigmas[i]).epsilon(1e-10));
    }
}

TEST_CASE("probabilistic Eckart-Young check") {
    SplitMix64 rng(26);
    const Matrix m = oracle::random_matrix(5, 12, rng, true);
    const std::size_t r = 2;
    const SvdTriplets svd = truncated_svd(m, r);
    Matrix diff = m;
    const Matrix rec = reconstruct(svd);
    for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] -= rec.data()[i];
    const double best = fro_norm(diff);

    for (int candidate = 0; candidate < 1000; ++candidate) {
        const Matrix u = oracle::random_matrix(5, r, rng, true);
        const Matrix v = oracle::random_matrix(r, 12, rng, true);
        const Matrix b = matmul(u, v);
        Matrix d = m;
        for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] -= b.data()[i];
        CHECK(best <= fro_norm(d) + 1e-12);
    }
}

TEST_CASE("rank-deficient input flags and completes the basis") {
    // 3x5 matrix with two exactly-zero rows: second and third requested
    // triplets have sigma 0 and the bases must still be completed.
    SplitMix64 rng(27);
    Matrix m(3, 5);
    for (std::size_t j = 0; j < 5; ++j) m(0, j) = rng.uniform() + 0.1;
    const SvdTriplets svd = truncated_svd(m, 3);
    CHECK(svd.rank_deficient);
    CHECK(svd.sigmas[1] < 1e-10 * svd.sigmas[0]);
    CHECK(oracle::orthonormality_defect(svd.left) < 1e-10);
    CHECK(oracle::orthonormality_defect(svd.right) < 1e-10);
}

TEST_CASE("truncated_svd rejects bad arguments") {
    const Matrix m(3, 4);
    CHECK_THROWS_AS(truncated_svd(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(truncated_svd(m, 4), std::invalid_argument);
}

TEST_CASE("determinism across repeated calls") {
    SplitMix64 rng(28);
    const Matrix m = oracle::random_matrix(6, 25, rng, true);
    const SvdTriplets a = truncated_svd(m, 4);
    const SvdTriplets b = truncated_svd(m, 4);
    CHECK(oracle::max_abs_diff(a.left, b.left) == 0.0);
    CHECK(oracle::max_abs_diff(a.right, b.right) == 0.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.sigmas[i] == b.sigmas[i]);
}

TEST_CASE("reconstruct_leading sums prefixes of the triplets") {
    SplitMix64 rng(29);
    const Matrix m = oracle::random_matrix(4, 9, rng, true);
    const SvdTriplets svd = truncated_svd(m, 4);
    const Matrix full = reconstruct(svd);
    const Matrix lead = reconstruct_leading(svd, 4);
    CHECK(oracle::max_abs_diff(full, lead) < 1e-12);

    // Leading-1 equals the outer product of the dominant triplet.
    const Matrix one = reconstruct_leading(svd, 1);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            CHECK(one(i, j) ==
                  doctest::Approx(svd.sigmas[0] * svd.left(i, 0) * svd.right(j, 0))
                      .epsilon(1e-12));
        }
    }
}
