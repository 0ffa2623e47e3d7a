#include "tilt/polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace tilt {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDedupeTol = 1e-8;
constexpr std::size_t kEnumGuard = 24;

void validate(const SignedPolyhedron& P) {
    if (P.Aeq.cols() != P.signs.size())
        throw std::invalid_argument("polyhedron: signs length must match columns");
    if (P.Aeq.rows() != P.beq.size())
        throw std::invalid_argument("polyhedron: beq length must match rows");
}

// --- standard-form translation for the simplex -----------------------------

struct StandardForm {
    Mat A;
    Vec b;
    Vec c;
    // var -> original coordinate, +1/-1 factor (free splits give two vars)
    std::vector<std::size_t> coordOf;
    std::vector<double> factorOf;
    std::size_t dim = 0;
};

StandardForm standardize(const Vec& objective, const SignedPolyhedron& P) {
    StandardForm sf;
    sf.dim = P.signs.size();
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < P.signs.size(); ++j) {
        if (P.signs[j] == SignKind::Zero) continue;
        sf.coordOf.push_back(j);
        sf.factorOf.push_back(1.0);
        cols.push_back(j);
        if (P.signs[j] == SignKind::Free) {
            sf.coordOf.push_back(j);
            sf.factorOf.push_back(-1.0);
            cols.push_back(j);
        }
    }
    sf.A = Mat(P.Aeq.rows(), sf.coordOf.size());
    for (std::size_t i = 0; i < P.Aeq.rows(); ++i)
        for (std::size_t v = 0; v < sf.coordOf.size(); ++v)
            sf.A(i, v) = sf.factorOf[v] * P.Aeq(i, sf.coordOf[v]);
    sf.b = P.beq;
    sf.c.assign(sf.coordOf.size(), 0.0);
    for (std::size_t v = 0; v < sf.coordOf.size(); ++v)
        sf.c[v] = sf.factorOf[v] * objective[sf.coordOf[v]];
    return sf;
}

// --- tableau simplex (min c^T y, A y = b, y >= 0) ---------------------------

struct SimplexOutcome {
    LPStatus status = LPStatus::Infeasible;
    Vec y;
    std::vector<std::size_t> basis;
    Vec rayY;
};

class Tableau {
public:
    Tableau(const Mat& A, const Vec& b, double pivotTol)
        : m_(A.rows()), n_(A.cols()), rhsCol_(A.cols() + A.rows()), pivotTol_(pivotTol) {
        // Rows are flipped so the RHS is nonnegative, then artificials give
        // the identity starting basis.  rhsCol_ stays fixed even when
        // redundant rows are dropped later.
        t_ = Mat(m_, n_ + m_ + 1);
        for (std::size_t i = 0; i < m_; ++i) {
            const double s = b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) t_(i, j) = s * A(i, j);
            t_(i, n_ + i) = 1.0;
            t_(i, rhsCol_) = s * b[i];
        }
        basis_.resize(m_);
        std::iota(basis_.begin(), basis_.end(), n_);
    }

    // Bland's rule both ways: smallest eligible entering index, smallest
    // basis index among minimum-ratio rows.  Returns false on unboundedness.
    bool minimize(const Vec& cost, std::size_t numCols) {
        Vec red;
        double shift;
        compute_reduced(cost, numCols, red, shift);
        (void)shift;
        for (;;) {
            std::size_t enter = numCols;
            for (std::size_t j = 0; j < numCols; ++j)
                if (red[j] < -pivotTol_) {
                    enter = j;
                    break;
                }
            if (enter == numCols) return true;

            std::size_t leave = m_;
            double bestRatio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (t_(i, enter) <= pivotTol_) continue;
                const double ratio = rhs(i) / t_(i, enter);
                if (leave == m_ || ratio < bestRatio - 1e-15 ||
                    (std::abs(ratio - bestRatio) <= 1e-15 && basis_[i] < basis_[leave])) {
                    leave = i;
                    bestRatio = ratio;
                }
            }
            if (leave == m_) {
                unboundedEnter_ = enter;
                return false;
            }
            pivot(leave, enter);
            compute_reduced(cost, numCols, red, shift);
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = t_(row, col);
        for (std::size_t j = 0; j < t_.cols(); ++j) t_(row, j) /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = t_(i, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < t_.cols(); ++j) t_(i, j) -= f * t_(row, j);
        }
        basis_[row] = col;
    }

    double rhs(std::size_t i) const { return t_(i, rhsCol_); }
    double entry(std::size_t i, std::size_t j) const { return t_(i, j); }
    const std::vector<std::size_t>& basis() const { return basis_; }
    std::size_t rows() const { return m_; }
    std::size_t unbounded_enter() const { return unboundedEnter_; }

    double objective_value(const Vec& cost) const {
        double z = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < cost.size()) z += cost[basis_[i]] * rhs(i);
        return z;
    }

    // Removes rows whose basic artificial cannot be pivoted out (redundant
    // equalities); pivots the rest onto structural columns.
    void clear_artificials() {
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) {
                keep.push_back(i);
                continue;
            }
            std::size_t col = n_;
            for (std::size_t j = 0; j < n_; ++j)
                if (std::abs(t_(i, j)) > pivotTol_) {
                    col = j;
                    break;
                }
            if (col < n_) {
                pivot(i, col);
                keep.push_back(i);
            }
        }
        if (keep.size() != m_) {
            Mat nt(keep.size(), t_.cols());
            std::vector<std::size_t> nb(keep.size());
            for (std::size_t k = 0; k < keep.size(); ++k) {
                for (std::size_t j = 0; j < t_.cols(); ++j) nt(k, j) = t_(keep[k], j);
                nb[k] = basis_[keep[k]];
            }
            t_ = nt;
            basis_ = nb;
            m_ = keep.size();
        }
    }

private:
    void compute_reduced(const Vec& cost, std::size_t numCols, Vec& red, double& shift) const {
        red.assign(numCols, 0.0);
        shift = 0.0;
        for (std::size_t j = 0; j < numCols; ++j) {
            double r = j < cost.size() ? cost[j] : 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] < cost.size()) r -= cost[basis_[i]] * t_(i, j);
            red[j] = r;
        }
    }

    Mat t_;
    std::vector<std::size_t> basis_;
    std::size_t m_, n_, rhsCol_;
    double pivotTol_;
    std::size_t unboundedEnter_ = 0;
};

SimplexOutcome simplex_min(const Mat& A, const Vec& b, const Vec& c, double pivotTol) {
    const std::size_t m = A.rows(), n = A.cols();
    Tableau tab(A, b, pivotTol);

    Vec phase1Cost(n + m, 0.0);
    for (std::size_t j = n; j < n + m; ++j) phase1Cost[j] = 1.0;
    tab.minimize(phase1Cost, n + m);
    if (tab.objective_value(phase1Cost) > 1e-8 * (1.0 + norm1(b)))
        return {LPStatus::Infeasible, {}, {}, {}};
    tab.clear_artificials();

    SimplexOutcome out;
    if (!tab.minimize(c, n)) {
        out.status = LPStatus::Unbounded;
        const std::size_t enter = tab.unbounded_enter();
        out.rayY.assign(n, 0.0);
        out.rayY[enter] = 1.0;
        for (std::size_t i = 0; i < tab.rows(); ++i)
            if (tab.basis()[i] < n) out.rayY[tab.basis()[i]] = -tab.entry(i, enter);
        out.basis = tab.basis();
        return out;
    }
    out.status = LPStatus::Optimal;
    out.y.assign(n, 0.0);
    for (std::size_t i = 0; i < tab.rows(); ++i)
        if (tab.basis()[i] < n) out.y[tab.basis()[i]] = tab.rhs(i);
    out.basis = tab.basis();
    return out;
}

Vec to_original(const StandardForm& sf, const Vec& y) {
    Vec x(sf.dim, 0.0);
    for (std::size_t v = 0; v < y.size(); ++v) x[sf.coordOf[v]] += sf.factorOf[v] * y[v];
    return x;
}

// --- vertex / ray enumeration helpers ---------------------------------------

bool near_duplicate(const std::vector<Vec>& seen, const Vec& candidate) {
    for (const Vec& v : seen)
        if (norm(sub(v, candidate)) <= kDedupeTol * (1.0 + norm(v))) return true;
    return false;
}

// All size-k index subsets of {0..pool-1} in lexicographic order.
void for_each_subset(std::size_t pool, std::size_t k,
                     const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k > pool) return;
    for (;;) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == pool - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

bool sign_feasible(const SignedPolyhedron& P, const Vec& x) {
    for (std::size_t j = 0; j < P.signs.size(); ++j) {
        if (P.signs[j] == SignKind::NonNeg && x[j] < -kFeasTol) return false;
        if (P.signs[j] == SignKind::Zero && std::abs(x[j]) > kFeasTol) return false;
    }
    return true;
}

}  // namespace

LPResult solve_lp(const Vec& objective, const SignedPolyhedron& P, bool maximize,
                  double pivotTol) {
    validate(P);
    if (objective.size() != P.signs.size())
        throw std::invalid_argument("solve_lp: objective length must match coordinates");

    const StandardForm sf = standardize(objective, P);
    Vec cost = sf.c;
    if (maximize)
        for (double& v : cost) v = -v;

    const SimplexOutcome sx = simplex_min(sf.A, sf.b, cost, pivotTol);
    LPResult out;
    out.status = sx.status;
    if (sx.status == LPStatus::Optimal) {
        out.vertexSolution = to_original(sf, sx.y);
        out.optimalValue = dot(objective, out.vertexSolution);
    } else if (sx.status == LPStatus::Unbounded) {
        Vec ray = to_original(sf, sx.rayY);
        const double len = norm(ray);
        if (len > 0.0) ray = scaled(ray, 1.0 / len);
        out.ray = ray;
    }
    std::vector<std::size_t> coords;
    for (std::size_t v : sx.basis)
        if (v < sf.coordOf.size()) coords.push_back(sf.coordOf[v]);
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    out.basis = coords;
    return out;
}

VertexSet enumerate_vertices(const SignedPolyhedron& P, std::size_t maxSupport) {
    validate(P);
    const std::size_t n = P.signs.size();

    std::vector<std::size_t> nonneg, freeCols;
    for (std::size_t j = 0; j < n; ++j) {
        if (P.signs[j] == SignKind::NonNeg) nonneg.push_back(j);
        if (P.signs[j] == SignKind::Free) freeCols.push_back(j);
    }
    if (nonneg.size() > kEnumGuard)
        throw std::invalid_argument("enumerate_vertices: more than 24 signed coordinates");

    std::vector<Vec> effectiveCols;
    for (std::size_t j : nonneg) effectiveCols.push_back(P.Aeq.col(j));
    for (std::size_t j : freeCols) effectiveCols.push_back(P.Aeq.col(j));
    const Mat effective = Mat::from_cols(effectiveCols, P.Aeq.rows());
    const std::size_t effRank = rank_and_nullspace(effective).rank;

    if (maxSupport == kAutoSupport)
        maxSupport = effRank >= freeCols.size() ? effRank - freeCols.size() : 0;
    maxSupport = std::min(maxSupport, nonneg.size());

    VertexSet out;
    const double bScale = 1.0 + norm(P.beq);
    for (std::size_t k = 0; k <= maxSupport; ++k) {
        for_each_subset(nonneg.size(), k, [&](const std::vector<std::size_t>& pick) {
            std::vector<Vec> cols;
            std::vector<std::size_t> coordIdx;
            for (std::size_t j : freeCols) {
                cols.push_back(P.Aeq.col(j));
                coordIdx.push_back(j);
            }
            for (std::size_t p : pick) {
                cols.push_back(P.Aeq.col(nonneg[p]));
                coordIdx.push_back(nonneg[p]);
            }
            const Mat sub = Mat::from_cols(cols, P.Aeq.rows());
            const auto ls = solve_least_squares(sub, P.beq);
            if (!ls.unique) return;  // support does not pin a single point
            if (ls.residualNorm > kFeasTol * bScale) return;
            Vec x(n, 0.0);
            for (std::size_t c = 0; c < coordIdx.size(); ++c) x[coordIdx[c]] = ls.solution[c];
            if (!sign_feasible(P, x)) return;
            if (!near_duplicate(out.vertices, x)) out.vertices.push_back(x);
        });
    }

    SignedPolyhedron cone{P.Aeq, Vec(P.beq.size(), 0.0), P.signs};
    const VertexSet rec = cone_extreme_rays(cone);
    out.rays = rec.rays;
    out.lineality = rec.lineality;
    return out;
}

VertexSet cone_extreme_rays(const SignedPolyhedron& C) {
    validate(C);
    if (norm(C.beq) > 1e-12)
        throw std::invalid_argument("cone_extreme_rays: beq must be zero");
    const std::size_t n = C.signs.size();

    std::vector<std::size_t> nonneg, freeCols;
    for (std::size_t j = 0; j < n; ++j) {
        if (C.signs[j] == SignKind::NonNeg) nonneg.push_back(j);
        if (C.signs[j] == SignKind::Free) freeCols.push_back(j);
    }
    if (nonneg.size() > kEnumGuard)
        throw std::invalid_argument("cone_extreme_rays: more than 24 signed coordinates");

    const auto stacked_nullspace = [&](const std::vector<std::size_t>& zeroed) {
        std::vector<Vec> rows;
        for (std::size_t i = 0; i < C.Aeq.rows(); ++i) rows.push_back(C.Aeq.row(i));
        for (std::size_t j : zeroed) {
            Vec e(n, 0.0);
            e[j] = 1.0;
            rows.push_back(e);
        }
        for (std::size_t j = 0; j < n; ++j)
            if (C.signs[j] == SignKind::Zero) {
                Vec e(n, 0.0);
                e[j] = 1.0;
                rows.push_back(e);
            }
        return rank_and_nullspace(Mat::from_rows(rows, n)).nullspace;
    };

    VertexSet out;
    const Mat L = stacked_nullspace(nonneg);  // every nonneg coordinate pinned
    for (std::size_t j = 0; j < L.cols(); ++j) out.lineality.push_back(L.col(j));

    std::vector<Vec> effectiveCols;
    for (std::size_t j : nonneg) effectiveCols.push_back(C.Aeq.col(j));
    for (std::size_t j : freeCols) effectiveCols.push_back(C.Aeq.col(j));
    const std::size_t effRank =
        nonneg.empty() && freeCols.empty()
            ? 0
            : rank_and_nullspace(Mat::from_cols(effectiveCols, C.Aeq.rows())).rank;
    const std::size_t supportCap = std::min(
        nonneg.size(), effRank >= freeCols.size() ? effRank - freeCols.size() + 1 : 1);

    for (std::size_t k = 1; k <= supportCap; ++k) {
        for_each_subset(nonneg.size(), k, [&](const std::vector<std::size_t>& pick) {
            std::vector<std::size_t> zeroed;
            std::size_t pi = 0;
            for (std::size_t p = 0; p < nonneg.size(); ++p) {
                if (pi < pick.size() && pick[pi] == p) {
                    ++pi;
                    continue;
                }
                zeroed.push_back(nonneg[p]);
            }
            const Mat N = stacked_nullspace(zeroed);
            if (N.cols() != out.lineality.size() + 1) return;
            // Strip the lineality component; exactly one direction remains.
            Vec best;
            double bestLen = 0.0;
            for (std::size_t c = 0; c < N.cols(); ++c) {
                Vec d = N.col(c);
                for (const Vec& l : out.lineality) d = sub(d, scaled(l, dot(l, d)));
                const double len = norm(d);
                if (len > bestLen) {
                    bestLen = len;
                    best = d;
                }
            }
            if (bestLen <= kDedupeTol) return;
            best = scaled(best, 1.0 / bestLen);
            if (!sign_feasible(C, best)) {
                best = scaled(best, -1.0);
                if (!sign_feasible(C, best)) return;
            }
            if (!near_duplicate(out.rays, best)) out.rays.push_back(best);
        });
    }
    return out;
}

FaceResult argmax_face_vertices(const Vec& objective, const SignedPolyhedron& P,
                                double pivotTol) {
    const LPResult lp = solve_lp(objective, P, /*maximize=*/true, pivotTol);
    FaceResult out;
    out.lpStatus = lp.status;
    if (lp.status == LPStatus::Infeasible) return out;
    if (lp.status == LPStatus::Unbounded) {
        out.bounded = false;  // improving ray: no maximizer exists
        return out;
    }
    SignedPolyhedron cut = P;
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < P.Aeq.rows(); ++i) rows.push_back(P.Aeq.row(i));
    rows.push_back(objective);
    cut.Aeq = Mat::from_rows(rows, P.signs.size());
    cut.beq.push_back(lp.optimalValue);
    out.face = enumerate_vertices(cut);
    out.bounded = out.face.rays.empty() && out.face.lineality.empty();
    return out;
}

}  // namespace tilt
