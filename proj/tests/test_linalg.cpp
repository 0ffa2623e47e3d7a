#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "tilt/linalg.hpp"

using namespace tilt;

namespace {

Mat random_matrix(std::mt19937_64& gen, std::size_t m, std::size_t n) {
    Mat a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = oracle::uniform(gen, -2.0, 2.0);
    return a;
}

Mat random_symmetric(std::mt19937_64& gen, std::size_t n) {
    Mat s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) s(i, j) = s(j, i) = oracle::uniform(gen, -3.0, 3.0);
    return s;
}

}  // namespace

TEST_CASE("jacobi eigenvalues match the closed 2x2 formula") {
    auto gen = oracle::rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = oracle::uniform(gen, -5.0, 5.0);
        const double b = oracle::uniform(gen, -5.0, 5.0);
        const double c = oracle::uniform(gen, -5.0, 5.0);
        Mat s(2, 2);
        s(0, 0) = a; s(0, 1) = s(1, 0) = b; s(1, 1) = c;
        const auto [lo, hi] = oracle::eig2x2(a, b, c);
        const auto e = sym_eig(s);
        CHECK(e.values[0] == doctest::Approx(lo).epsilon(1e-12));
        CHECK(e.values[1] == doctest::Approx(hi).epsilon(1e-12));
    }
}

TEST_CASE("eigenpairs satisfy the residual and orthonormality contracts") {
    auto gen = oracle::rng(102);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + trial % 7;
        const Mat s = random_symmetric(gen, n);
        const auto e = sym_eig(s);
        const double scale = frobenius_norm(s);
        for (std::size_t k = 0; k < n; ++k) {
            const Vec u = e.vectors.col(k);
            const Vec r = sub(s * u, scaled(u, e.values[k]));
            CHECK(norm(r) <= 1e-8 * (scale + 1e-30));
            for (std::size_t j = 0; j <= k; ++j) {
                const double expected = (j == k) ? 1.0 : 0.0;
                CHECK(dot(e.vectors.col(j), u) == doctest::Approx(expected).epsilon(1e-10));
            }
        }
        for (std::size_t k = 0; k + 1 < n; ++k) CHECK(e.values[k] <= e.values[k + 1] + 1e-12);
    }
}

TEST_CASE("minimum eigenvalue is a lower bound for random Rayleigh quotients") {
    auto gen = oracle::rng(103);
    const Mat s = random_symmetric(gen, 6);
    const auto me = sym_eig_min(s);
    CHECK(norm(sub(s * me.vector, scaled(me.vector, me.value))) <= 1e-8 * frobenius_norm(s));
    for (int probe = 0; probe < 100; ++probe) {
        Vec u(6);
        for (double& x : u) x = oracle::uniform(gen, -1.0, 1.0);
        const double len2 = dot(u, u);
        if (len2 < 1e-12) continue;
        CHECK(me.value <= dot(u, s * u) / len2 + 1e-9);
    }
}

TEST_CASE("rank and nullspace on the hand-worked corner polyhedron jacobian") {
    // Gradients of four inequalities meeting at the origin of R^3; they span
    // the whole space, so the nullspace is trivial.
    const Mat a = Mat::from_rows(
        {{1, 0, -1}, {-1, 0, -1}, {0, 1, -1}, {0, -1, -1}}, 3);
    const auto rn = rank_and_nullspace(a);
    CHECK(rn.rank == 3);
    CHECK(rn.nullspace.cols() == 0);
    CHECK(rn.nullspace.rows() == 3);
}

TEST_CASE("duplicated gradient rows collapse to rank one") {
    const Mat a = Mat::from_rows({{1, 0, 0}, {1, 0, 0}}, 3);
    const auto rn = rank_and_nullspace(a);
    CHECK(rn.rank == 1);
    REQUIRE(rn.nullspace.cols() == 2);
    // Nullspace must be exactly the e2/e3 coordinate plane: first components
    // vanish and the basis reconstructs both coordinate directions.
    CHECK(std::abs(rn.nullspace(0, 0)) <= 1e-12);
    CHECK(std::abs(rn.nullspace(0, 1)) <= 1e-12);
    const Mat nnT = rn.nullspace * rn.nullspace.transposed();
    CHECK(nnT(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(nnT(2, 2) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(nnT(1, 2)) <= 1e-10);
}

TEST_CASE("reduced quadratic over a coordinate plane has unit minimum eigenvalue") {
    // Basis for the plane {x1 = 0}, reduced against diag(0, 1, 2).
    const Mat basis = Mat::from_cols({{0, 1, 0}, {0, 0, 1}}, 3);
    Mat h(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 2.0;
    const Mat reduced = basis.transposed() * (h * basis);
    const auto me = sym_eig_min(reduced);
    CHECK(me.value == doctest::Approx(1.0).epsilon(1e-12));
    const Vec r = sub(reduced * me.vector, scaled(me.vector, me.value));
    CHECK(norm(r) <= 1e-8 * frobenius_norm(reduced));
}

TEST_CASE("nearly parallel rows give the expected small singular value") {
    const double eps = 1e-3;
    const Mat a = Mat::from_rows({{1, 0}, {1, eps}}, 2);
    const double smin = min_singular_value(a);
    CHECK(smin == doctest::Approx(eps / std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("smallest singular value is transpose invariant") {
    auto gen = oracle::rng(104);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 1 + trial % 5;
        const std::size_t n = 1 + (trial / 5) % 5;
        const Mat a = random_matrix(gen, m, n);
        const double s1 = min_singular_value(a);
        const double s2 = min_singular_value(a.transposed());
        CHECK(std::abs(s1 - s2) <= 1e-9 * (1.0 + std::max(s1, s2)));
    }
}

TEST_CASE("constructed rank deficiency is recovered and the nullspace is clean") {
    auto gen = oracle::rng(105);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t m = 3 + trial % 3;
        const std::size_t n = 3 + (trial / 3) % 3;
        const std::size_t r = 1 + trial % std::min(m, n);
        const Mat b = random_matrix(gen, m, r);
        const Mat c = random_matrix(gen, r, n);
        const Mat a = b * c;
        const auto rn = rank_and_nullspace(a);
        CHECK(rn.rank == r);
        CHECK(rn.rank + rn.nullspace.cols() == n);

        double sigmaMax = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            sigmaMax = std::max(sigmaMax, norm(a * e));
        }
        for (std::size_t j = 0; j < rn.nullspace.cols(); ++j) {
            CHECK(norm(a * rn.nullspace.col(j)) <= 1e-10 * sigmaMax);
            for (std::size_t i = 0; i <= j; ++i) {
                const double expected = (i == j) ? 1.0 : 0.0;
                CHECK(dot(rn.nullspace.col(i), rn.nullspace.col(j)) ==
                      doctest::Approx(expected).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("least squares reproduces consistent systems and flags uniqueness") {
    auto gen = oracle::rng(106);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const std::size_t m = n + trial % 3;
        const Mat a = random_matrix(gen, m, n);
        Vec xTrue(n);
        for (double& v : xTrue) v = oracle::uniform(gen, -1.0, 1.0);
        const Vec b = a * xTrue;
        const auto ls = solve_least_squares(a, b);
        CHECK(ls.unique);
        CHECK(ls.residualNorm <= 1e-8 * (1.0 + norm(b)));
        for (std::size_t i = 0; i < n; ++i)
            CHECK(ls.solution[i] == doctest::Approx(xTrue[i]).epsilon(1e-7));
    }
}

TEST_CASE("minimum-norm solution is orthogonal to the nullspace") {
    auto gen = oracle::rng(107);
    for (int trial = 0; trial < 20; ++trial) {
        const Mat b = random_matrix(gen, 4, 2);
        const Mat c = random_matrix(gen, 2, 5);
        const Mat a = b * c;  // rank 2, wide: many solutions
        Vec xSeed(5);
        for (double& v : xSeed) v = oracle::uniform(gen, -1.0, 1.0);
        const Vec rhs = a * xSeed;
        const auto ls = solve_least_squares(a, rhs);
        CHECK_FALSE(ls.unique);
        CHECK(norm(sub(a * ls.solution, rhs)) <= 1e-7 * (1.0 + norm(rhs)));
        const auto rn = rank_and_nullspace(a);
        for (std::size_t j = 0; j < rn.nullspace.cols(); ++j)
            CHECK(std::abs(dot(ls.solution, rn.nullspace.col(j))) <= 1e-7);
    }
}

TEST_CASE("square LU solve agrees with least squares on well-conditioned systems") {
    auto gen = oracle::rng(108);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 4;
        Mat a = random_matrix(gen, n, n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) += 4.0;  // keep it far from singular
        Vec b(n);
        for (double& v : b) v = oracle::uniform(gen, -2.0, 2.0);
        const Vec x1 = solve_square(a, b);
        const auto x2 = solve_least_squares(a, b);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(x1[i] == doctest::Approx(x2.solution[i]).epsilon(1e-8));
    }
}

TEST_CASE("degenerate shapes behave") {
    const Mat zero(3, 3, 0.0);
    const auto rn = rank_and_nullspace(zero);
    CHECK(rn.rank == 0);
    CHECK(rn.nullspace.cols() == 3);

    const Mat empty(0, 3);
    const auto rnEmpty = rank_and_nullspace(empty);
    CHECK(rnEmpty.rank == 0);
    CHECK(rnEmpty.nullspace.cols() == 3);

    CHECK_THROWS_AS(min_singular_value(Mat(0, 2)), std::invalid_argument);
    CHECK_THROWS_AS(sym_eig(Mat(2, 3)), std::invalid_argument);
}
