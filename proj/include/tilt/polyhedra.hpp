#pragma once
// Polyhedra in standard signed form {x : Aeq x = beq, x_i >= 0 or x_i = 0 or
// x_i free per coordinate}: a deterministic two-phase simplex (Bland's rule),
// support-enumeration of vertices, extreme rays/lineality of cones, and the
// vertex set of an optimal face.  Everything is exact enumeration at small
// sizes; callers keep coordinate counts modest (hard guard at 24 signed
// coordinates for enumeration).

#include <cstddef>
#include <vector>

#include "tilt/linalg.hpp"

namespace tilt {

enum class SignKind { Free, NonNeg, Zero };

struct SignedPolyhedron {
    Mat Aeq;  // Aeq x = beq
    Vec beq;
    std::vector<SignKind> signs;  // one entry per coordinate of x
};

enum class LPStatus { Optimal, Unbounded, Infeasible };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    double optimalValue = 0.0;
    Vec vertexSolution;              // populated when Optimal
    std::vector<std::size_t> basis;  // original coordinates basic at the end
    Vec ray;                         // populated when Unbounded: unit improving direction
};

LPResult solve_lp(const Vec& objective, const SignedPolyhedron& P, bool maximize,
                  double pivotTol = 1e-9);

struct VertexSet {
    std::vector<Vec> vertices;
    std::vector<Vec> rays;       // unit length, sign-feasible
    std::vector<Vec> lineality;  // orthonormal basis of the lineality space
};

inline constexpr std::size_t kAutoSupport = static_cast<std::size_t>(-1);

// Vertices by support enumeration plus the recession cone's rays/lineality.
// The default support cap is rank(Aeq over non-fixed coords) minus the number
// of free coordinates (free coordinates occupy basis slots at every vertex).
VertexSet enumerate_vertices(const SignedPolyhedron& P, std::size_t maxSupport = kAutoSupport);

// C.beq must be zero.  vertices stays empty; rays are the extreme directions
// modulo lineality, found through tight-constraint subsets whose residual
// system is one-dimensional.
VertexSet cone_extreme_rays(const SignedPolyhedron& C);

struct FaceResult {
    LPStatus lpStatus = LPStatus::Infeasible;
    VertexSet face;  // maximizers; empty unless lpStatus == Optimal
    bool bounded = true;  // false iff the set of maximizers has nonzero recession
};

FaceResult argmax_face_vertices(const Vec& objective, const SignedPolyhedron& P,
                                double pivotTol = 1e-9);

}  // namespace tilt
