#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "tilt/polyhedra.hpp"

using namespace tilt;

namespace {

SignedPolyhedron corner_multipliers() {
    // Lagrange multipliers of the four-plane corner problem: gradient
    // combination matching (-0.25, 0, -1), all coefficients nonnegative.
    SignedPolyhedron P;
    P.Aeq = Mat::from_rows({{1, -1, 0, 0}, {0, 0, 1, -1}, {-1, -1, -1, -1}}, 4);
    P.beq = {-0.25, 0.0, -1.0};
    P.signs = {SignKind::NonNeg, SignKind::NonNeg, SignKind::NonNeg, SignKind::NonNeg};
    return P;
}

SignedPolyhedron parabola_multipliers() {
    // lambda1 + lambda2 - lambda3 = 1, lambda >= 0: two vertices and two
    // extreme recession rays.
    SignedPolyhedron P;
    P.Aeq = Mat::from_rows({{1, 1, -1}, {0, 0, 0}, {0, 0, 0}}, 3);
    P.beq = {1.0, 0.0, 0.0};
    P.signs = {SignKind::NonNeg, SignKind::NonNeg, SignKind::NonNeg};
    return P;
}

bool contains_point(const std::vector<Vec>& pts, const Vec& target, double tol) {
    return std::any_of(pts.begin(), pts.end(), [&](const Vec& p) {
        return norm(sub(p, target)) <= tol;
    });
}

// Membership via an LP over convex/conic/affine multipliers of the generators.
bool minkowski_member(const VertexSet& gen, const Vec& x, double tol) {
    const std::size_t n = x.size();
    const std::size_t nv = gen.vertices.size(), nr = gen.rays.size(), nl = gen.lineality.size();
    if (nv == 0) return false;
    SignedPolyhedron P;
    P.Aeq = Mat(n + 1, nv + nr + nl);
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t i = 0; i < n; ++i) P.Aeq(i, v) = gen.vertices[v][i];
        P.Aeq(n, v) = 1.0;
    }
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t i = 0; i < n; ++i) P.Aeq(i, nv + r) = gen.rays[r][i];
    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t i = 0; i < n; ++i) P.Aeq(i, nv + nr + l) = gen.lineality[l][i];
    P.beq = x;
    P.beq.push_back(1.0);
    P.signs.assign(nv + nr, SignKind::NonNeg);
    P.signs.insert(P.signs.end(), nl, SignKind::Free);
    const LPResult lp = solve_lp(Vec(nv + nr + nl, 0.0), P, false);
    if (lp.status != LPStatus::Optimal) return false;
    // Double-check the reconstruction numerically.
    Vec rebuilt(n, 0.0);
    for (std::size_t v = 0; v < nv; ++v)
        rebuilt = add(rebuilt, scaled(gen.vertices[v], lp.vertexSolution[v]));
    for (std::size_t r = 0; r < nr; ++r)
        rebuilt = add(rebuilt, scaled(gen.rays[r], lp.vertexSolution[nv + r]));
    for (std::size_t l = 0; l < nl; ++l)
        rebuilt = add(rebuilt, scaled(gen.lineality[l], lp.vertexSolution[nv + nr + l]));
    return norm(sub(rebuilt, x)) <= tol * (1.0 + norm(x));
}

}  // namespace

TEST_CASE("corner multiplier polytope has exactly the two known vertices") {
    const VertexSet vs = enumerate_vertices(corner_multipliers());
    REQUIRE(vs.vertices.size() == 2);
    CHECK(contains_point(vs.vertices, {0.0, 0.25, 0.375, 0.375}, 1e-9));
    CHECK(contains_point(vs.vertices, {0.375, 0.625, 0.0, 0.0}, 1e-9));
    CHECK(vs.rays.empty());
    CHECK(vs.lineality.empty());
}

TEST_CASE("parabola multiplier set: two vertices, two unit recession rays") {
    const VertexSet vs = enumerate_vertices(parabola_multipliers());
    REQUIRE(vs.vertices.size() == 2);
    CHECK(contains_point(vs.vertices, {1.0, 0.0, 0.0}, 1e-9));
    CHECK(contains_point(vs.vertices, {0.0, 1.0, 0.0}, 1e-9));
    REQUIRE(vs.rays.size() == 2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(contains_point(vs.rays, {s, 0.0, s}, 1e-9));
    CHECK(contains_point(vs.rays, {0.0, s, s}, 1e-9));
    CHECK(vs.lineality.empty());
}

TEST_CASE("orthant and half-line cones") {
    SignedPolyhedron orthant;
    orthant.Aeq = Mat(0, 2);
    orthant.beq = {};
    orthant.signs = {SignKind::NonNeg, SignKind::NonNeg};
    const VertexSet vs = cone_extreme_rays(orthant);
    REQUIRE(vs.rays.size() == 2);
    CHECK(contains_point(vs.rays, {1.0, 0.0}, 1e-9));
    CHECK(contains_point(vs.rays, {0.0, 1.0}, 1e-9));
    CHECK(vs.lineality.empty());

    SignedPolyhedron diag;
    diag.Aeq = Mat::from_rows({{1, -1, 0}}, 3);
    diag.beq = {0.0};
    diag.signs = {SignKind::NonNeg, SignKind::Free, SignKind::Free};
    const VertexSet ds = cone_extreme_rays(diag);
    REQUIRE(ds.lineality.size() == 1);
    CHECK(std::abs(ds.lineality[0][2]) == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(ds.rays.size() == 1);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(contains_point(ds.rays, {s, s, 0.0}, 1e-9));
}

TEST_CASE("plane presented with free coordinates has no vertices, only lineality") {
    SignedPolyhedron plane;
    plane.Aeq = Mat::from_rows({{1, 0, 0}}, 3);
    plane.beq = {0.0};
    plane.signs = {SignKind::Free, SignKind::Free, SignKind::Free};
    const VertexSet vs = enumerate_vertices(plane);
    CHECK(vs.vertices.empty());
    CHECK(vs.rays.empty());
    CHECK(vs.lineality.size() == 2);
}

TEST_CASE("simplex statuses: optimal, unbounded with certificate, infeasible") {
    SignedPolyhedron P = parabola_multipliers();

    const LPResult mx = solve_lp({0.0, 0.0, 1.0}, P, true);
    CHECK(mx.status == LPStatus::Unbounded);
    REQUIRE(mx.ray.size() == 3);
    CHECK(norm(mx.ray) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mx.ray[0] + mx.ray[1] - mx.ray[2]) <= 1e-9);  // stays in the cone
    CHECK(mx.ray[2] > 1e-9);                                     // improves the objective
    for (double v : mx.ray) CHECK(v >= -1e-12);

    const LPResult mn = solve_lp({0.0, 0.0, 1.0}, P, false);
    CHECK(mn.status == LPStatus::Optimal);
    CHECK(mn.optimalValue == doctest::Approx(0.0).epsilon(1e-10));

    SignedPolyhedron infeas;
    infeas.Aeq = Mat::from_rows({{1, 1}, {1, 1}}, 2);
    infeas.beq = {1.0, 2.0};
    infeas.signs = {SignKind::NonNeg, SignKind::NonNeg};
    CHECK(solve_lp({1.0, 0.0}, infeas, false).status == LPStatus::Infeasible);
}

TEST_CASE("zero-pinned coordinates are excluded from the solution") {
    SignedPolyhedron P;
    P.Aeq = Mat::from_rows({{1, 1, 1}}, 3);
    P.beq = {1.0};
    P.signs = {SignKind::NonNeg, SignKind::Zero, SignKind::NonNeg};
    const LPResult lp = solve_lp({0.0, 5.0, 1.0}, P, true);
    CHECK(lp.status == LPStatus::Optimal);
    CHECK(lp.vertexSolution[1] == 0.0);
    CHECK(lp.optimalValue == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("LP optimum equals the best enumerated vertex on bounded problems") {
    auto gen = oracle::rng(301);
    int instances = 0;
    while (instances < 25) {
        const std::size_t n = 3 + static_cast<std::size_t>(oracle::uniform_int(gen, 0, 3));
        const std::size_t extra = 1 + static_cast<std::size_t>(oracle::uniform_int(gen, 0, 1));
        // Random slice of the standard simplex: always nonempty and bounded.
        Vec interior(n);
        double total = 0.0;
        for (double& v : interior) {
            v = oracle::uniform(gen, 0.1, 1.0);
            total += v;
        }
        for (double& v : interior) v /= total;
        Mat A(extra + 1, n);
        Vec b(extra + 1, 0.0);
        for (std::size_t j = 0; j < n; ++j) A(0, j) = 1.0;
        b[0] = 1.0;
        for (std::size_t i = 1; i <= extra; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                A(i, j) = oracle::uniform(gen, -1.0, 1.0);
                b[i] += A(i, j) * interior[j];
            }
        }
        SignedPolyhedron P{A, b, std::vector<SignKind>(n, SignKind::NonNeg)};
        const VertexSet vs = enumerate_vertices(P);
        if (vs.vertices.empty()) continue;
        ++instances;
        CHECK(vs.rays.empty());
        CHECK(vs.lineality.empty());

        Vec c(n);
        for (double& v : c) v = oracle::uniform(gen, -2.0, 2.0);
        const LPResult lp = solve_lp(c, P, true);
        REQUIRE(lp.status == LPStatus::Optimal);
        double best = -1e300;
        for (const Vec& v : vs.vertices) best = std::max(best, dot(c, v));
        CHECK(lp.optimalValue == doctest::Approx(best).epsilon(1e-8));
    }
}

TEST_CASE("independent feasible points lie in the enumerated generator hull") {
    auto gen = oracle::rng(302);
    int instances = 0;
    while (instances < 20) {
        const std::size_t n = 3 + static_cast<std::size_t>(oracle::uniform_int(gen, 0, 2));
        const std::size_t m = 1 + static_cast<std::size_t>(oracle::uniform_int(gen, 0, 1));
        Vec seed(n);
        for (double& v : seed) v = oracle::uniform(gen, 0.0, 1.5);
        Mat A(m, n);
        Vec b(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                A(i, j) = oracle::uniform(gen, -1.0, 1.0);
                b[i] += A(i, j) * seed[j];
            }
        SignedPolyhedron P{A, b, std::vector<SignKind>(n, SignKind::NonNeg)};
        const VertexSet vs = enumerate_vertices(P);
        if (vs.vertices.empty()) continue;
        ++instances;

        // Average optimal solutions of a few random objectives: feasible by
        // convexity, generally not a vertex.
        Vec avg(n, 0.0);
        int found = 0;
        for (int t = 0; t < 4; ++t) {
            Vec c(n);
            for (double& v : c) v = oracle::uniform(gen, -1.0, 1.0);
            const LPResult lp = solve_lp(c, P, true);
            if (lp.status != LPStatus::Optimal) continue;
            avg = add(avg, lp.vertexSolution);
            ++found;
        }
        if (found == 0) continue;
        avg = scaled(avg, 1.0 / found);
        CHECK(minkowski_member(vs, avg, 1e-7));
    }
}

TEST_CASE("optimal faces: singleton, edge, and unbounded directions") {
    const SignedPolyhedron P = parabola_multipliers();

    // Maximizing -lambda3 pins lambda3 = 0, leaving the segment between the
    // two vertices.
    const FaceResult seg = argmax_face_vertices({0.0, 0.0, -1.0}, P);
    CHECK(seg.lpStatus == LPStatus::Optimal);
    CHECK(seg.bounded);
    REQUIRE(seg.face.vertices.size() == 2);
    CHECK(contains_point(seg.face.vertices, {1.0, 0.0, 0.0}, 1e-9));
    CHECK(contains_point(seg.face.vertices, {0.0, 1.0, 0.0}, 1e-9));

    const FaceResult pt = argmax_face_vertices({-1.0, 0.0, -1.0}, P);
    CHECK(pt.lpStatus == LPStatus::Optimal);
    CHECK(pt.bounded);
    REQUIRE(pt.face.vertices.size() == 1);
    CHECK(contains_point(pt.face.vertices, {0.0, 1.0, 0.0}, 1e-9));

    // Maximizing lambda1 - lambda3 is capped at 1 but the argmax face recedes
    // along (1,0,1): one vertex plus a recession ray.
    const FaceResult ridge = argmax_face_vertices({1.0, 0.0, -1.0}, P);
    CHECK(ridge.lpStatus == LPStatus::Optimal);
    CHECK_FALSE(ridge.bounded);
    REQUIRE(ridge.face.vertices.size() == 1);
    CHECK(contains_point(ridge.face.vertices, {1.0, 0.0, 0.0}, 1e-9));
    REQUIRE(ridge.face.rays.size() == 1);
    const double is = 1.0 / std::sqrt(2.0);
    CHECK(contains_point(ridge.face.rays, {is, 0.0, is}, 1e-9));

    const FaceResult unb = argmax_face_vertices({0.0, 0.0, 1.0}, P);
    CHECK(unb.lpStatus == LPStatus::Unbounded);
    CHECK_FALSE(unb.bounded);
    CHECK(unb.face.vertices.empty());

    // The whole set is the optimal face of the zero objective; its recession
    // cone is nonzero, so the face reports unbounded.
    const FaceResult whole = argmax_face_vertices({0.0, 0.0, 0.0}, P);
    CHECK(whole.lpStatus == LPStatus::Optimal);
    CHECK_FALSE(whole.bounded);
    CHECK(whole.face.vertices.size() == 2);
    CHECK(whole.face.rays.size() == 2);
}

TEST_CASE("degenerate pivoting terminates and agrees with enumeration") {
    // Classic cycling example for naive pivoting; Bland's rule must land on
    // the optimum.
    SignedPolyhedron P;
    P.Aeq = Mat::from_rows({{1, 0, 0, 0.25, -60, -0.04, 9},
                            {0, 1, 0, 0.5, -90, -0.02, 3},
                            {0, 0, 1, 0, 0, 1, 0}},
                           7);
    P.beq = {0.0, 0.0, 1.0};
    P.signs.assign(7, SignKind::NonNeg);
    const Vec c = {0, 0, 0, -0.75, 150, -0.02, 6};
    const LPResult lp = solve_lp(c, P, false);
    REQUIRE(lp.status == LPStatus::Optimal);

    const VertexSet vs = enumerate_vertices(P);
    REQUIRE_FALSE(vs.vertices.empty());
    double best = 1e300;
    for (const Vec& v : vs.vertices) best = std::min(best, dot(c, v));
    CHECK(lp.optimalValue == doctest::Approx(best).epsilon(1e-9));

    // Determinism: identical reruns bit for bit.
    const LPResult again = solve_lp(c, P, false);
    CHECK(again.status == lp.status);
    CHECK(again.optimalValue == lp.optimalValue);
    CHECK(again.vertexSolution == lp.vertexSolution);
    CHECK(again.basis == lp.basis);
}

TEST_CASE("vertex solutions are feasible and supported by independent columns") {
    const SignedPolyhedron P = corner_multipliers();
    const VertexSet vs = enumerate_vertices(P);
    for (const Vec& v : vs.vertices) {
        CHECK(norm(sub(P.Aeq * v, P.beq)) <= 1e-9 * (1.0 + norm(P.beq)));
        std::vector<Vec> cols;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j] > 1e-9) cols.push_back(P.Aeq.col(j));
        if (!cols.empty())
            CHECK(min_singular_value(Mat::from_cols(cols, P.Aeq.rows())) > 1e-9);
    }
}

TEST_CASE("shape validation throws") {
    SignedPolyhedron bad;
    bad.Aeq = Mat(1, 2);
    bad.beq = {0.0};
    bad.signs = {SignKind::NonNeg};  // wrong length
    CHECK_THROWS_AS(solve_lp({1.0}, bad, false), std::invalid_argument);

    SignedPolyhedron cone;
    cone.Aeq = Mat::from_rows({{1, 1}}, 2);
    cone.beq = {1.0};  // nonzero rhs is not a cone
    cone.signs = {SignKind::NonNeg, SignKind::NonNeg};
    CHECK_THROWS_AS(cone_extreme_rays(cone), std::invalid_argument);
}
