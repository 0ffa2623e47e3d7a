#include "tilt/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tilt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints are addressed by a global index: [0, l1) equalities,
// [l1, l1+l2) inequalities.
std::size_t eq_count(const PointData& pd) { return pd.equalities.size(); }

const ConstraintData& constraint_at(const PointData& pd, std::size_t g) {
    return g < eq_count(pd) ? pd.equalities[g]
                            : pd.inequalities[g - eq_count(pd)];
}

std::vector<std::size_t> active_globals(const PointData& pd,
                                        const ActiveSet& act) {
    std::vector<std::size_t> out;
    out.reserve(act.equalities.size() + act.inequalities.size());
    for (std::size_t e : act.equalities) out.push_back(e);
    for (std::size_t i : act.inequalities) out.push_back(eq_count(pd) + i);
    return out;
}

Mat gradient_rows(const PointData& pd, const std::vector<std::size_t>& globals) {
    std::vector<Vec> rows;
    rows.reserve(globals.size());
    for (std::size_t g : globals) rows.push_back(constraint_at(pd, g).gradient);
    return Mat::from_rows(rows, pd.x.size());
}

Mat equality_rows(const PointData& pd) {
    std::vector<Vec> rows;
    for (const auto& c : pd.equalities) rows.push_back(c.gradient);
    return Mat::from_rows(rows, pd.x.size());
}

Mat lagrangian_hessian(const PointData& pd, const Vec& lambda) {
    const std::size_t n = pd.x.size();
    Mat H = pd.objectiveHessian;
    for (std::size_t g = 0; g < lambda.size(); ++g) {
        if (lambda[g] == 0.0) continue;
        const Mat& Q = constraint_at(pd, g).hessian;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) H(i, j) += lambda[g] * Q(i, j);
    }
    return H;
}

// sum of lambda_g * hess q_g only (no objective); used by SOSCMS
Mat constraint_hessian_sum(const PointData& pd, const Vec& lambda) {
    const std::size_t n = pd.x.size();
    Mat H(n, n, 0.0);
    for (std::size_t g = 0; g < lambda.size(); ++g) {
        if (lambda[g] == 0.0) continue;
        const Mat& Q = constraint_at(pd, g).hessian;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) H(i, j) += lambda[g] * Q(i, j);
    }
    return H;
}

double curvature(const PointData& pd, std::size_t g, const Vec& v) {
    const Mat& Q = constraint_at(pd, g).hessian;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) s += v[i] * Q(i, j) * v[j];
    return s;
}

Mat reduce(const Mat& basis, const Mat& H) {
    // basis^T H basis for a column basis
    const std::size_t k = basis.cols();
    const std::size_t n = basis.rows();
    Mat out(k, k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        Vec Hb(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) Hb[i] += H(i, j) * basis(j, a);
        for (std::size_t b = 0; b < k; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += basis(i, b) * Hb[i];
            out(b, a) = s;
        }
    }
    // symmetrize exactly
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b) {
            double m = 0.5 * (out(a, b) + out(b, a));
            out(a, b) = out(b, a) = m;
        }
    return out;
}

double max_eigenvalue(const Mat& S) {
    if (S.rows() == 0) return -kInf;
    return sym_eig(S).values.back();
}

std::vector<Vec> orthonormal_vecs(const std::vector<Vec>& cols) {
    // modified Gram-Schmidt with one re-orthogonalization pass
    std::vector<Vec> basis;
    for (const Vec& c : cols) {
        Vec w = c;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) w = sub(w, scaled(b, dot(b, w)));
        double nw = norm(w);
        if (nw > 1e-10 * (1.0 + norm(c))) basis.push_back(scaled(w, 1.0 / nw));
    }
    return basis;
}

Mat orthonormal_columns(const std::vector<Vec>& cols, std::size_t dim) {
    return Mat::from_cols(orthonormal_vecs(cols), dim);
}

double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    for (std::size_t i = index + 1; i > 0; i /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
    }
    return r;
}

constexpr std::size_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                   31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
constexpr std::size_t kPrimeCount = sizeof(kPrimes) / sizeof(kPrimes[0]);

// deterministic low-discrepancy points in the unit ball
std::vector<Vec> halton_ball(std::size_t n, std::size_t count) {
    std::vector<Vec> pts;
    std::size_t index = 0;
    while (pts.size() < count && index < 100 * count + 1000) {
        Vec y(n);
        for (std::size_t j = 0; j < n; ++j)
            y[j] = 2.0 * halton(index, kPrimes[j % kPrimeCount]) - 1.0;
        ++index;
        if (norm(y) <= 1.0) pts.push_back(y);
    }
    return pts;
}

std::vector<Vec> halton_sphere(std::size_t n, std::size_t count) {
    std::vector<Vec> pts;
    std::size_t index = 0;
    while (pts.size() < count && index < 100 * count + 1000) {
        Vec y(n);
        for (std::size_t j = 0; j < n; ++j)
            y[j] = 2.0 * halton(index, kPrimes[j % kPrimeCount]) - 1.0;
        ++index;
        double r = norm(y);
        if (r > 1e-3 && r <= 1.0) pts.push_back(scaled(y, 1.0 / r));
    }
    return pts;
}

// size-ascending subset enumeration with a cap on the number of subsets
// visited; the callback returns false to stop early.  Returns true when the
// enumeration was complete (no truncation, no early stop request honoured
// as completion).
bool subsets_ascending(std::size_t n, std::size_t cap,
                       const std::function<bool(const std::vector<std::size_t>&)>& fn,
                       bool includeEmpty) {
    std::size_t visited = 0;
    if (includeEmpty) {
        ++visited;
        if (!fn({})) return true;
    }
    for (std::size_t k = 1; k <= n; ++k) {
        std::vector<std::size_t> pick(k);
        for (std::size_t i = 0; i < k; ++i) pick[i] = i;
        while (true) {
            if (visited >= cap) return false;
            ++visited;
            if (!fn(pick)) return true;
            // next lexicographic combination
            std::size_t i = k;
            while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return true;
}

double violation_measure(const PointData& pd) {
    double s = 0.0;
    for (const auto& c : pd.equalities) s += std::abs(c.value);
    for (const auto& c : pd.inequalities) s += std::max(c.value, 0.0);
    return s;
}

// Gauss-Newton projection onto the feasible set; returns the distance from
// `from` to the found feasible point, or nothing when the iteration fails.
std::optional<double> distance_to_feasible(const ProblemSpec& problem,
                                           const Vec& from) {
    Vec y = from;
    for (int iter = 0; iter < 60; ++iter) {
        PointData pd;
        try {
            pd = eval_point(problem, y);
        } catch (const DomainError&) {
            return std::nullopt;
        }
        double viol = violation_measure(pd);
        if (viol <= 1e-12) return norm(sub(y, from));

        std::vector<Vec> rows;
        Vec resid;
        for (const auto& c : pd.equalities) {
            rows.push_back(c.gradient);
            resid.push_back(c.value);
        }
        for (const auto& c : pd.inequalities) {
            if (c.value > 1e-12) {
                rows.push_back(c.gradient);
                resid.push_back(c.value);
            }
        }
        Mat J = Mat::from_rows(rows, y.size());
        Vec step = solve_least_squares(J, scaled(resid, -1.0)).solution;

        bool accepted = false;
        double s = 1.0;
        for (int bt = 0; bt < 12; ++bt, s *= 0.5) {
            Vec y2 = add(y, scaled(step, s));
            try {
                PointData pd2 = eval_point(problem, y2);
                if (violation_measure(pd2) < viol * (1.0 - 1e-4 * s)) {
                    y = y2;
                    accepted = true;
                    break;
                }
            } catch (const DomainError&) {
            }
        }
        if (!accepted) return std::nullopt;
    }
    return std::nullopt;
}

// directionally active inequalities: active ones whose gradient is
// orthogonal to v (local inequality indices)
std::vector<std::size_t> directionally_active(const PointData& pd,
                                              const ActiveSet& act,
                                              const Vec& v) {
    std::vector<std::size_t> out;
    for (std::size_t i : act.inequalities) {
        const Vec& g = pd.inequalities[i].gradient;
        if (std::abs(dot(g, v)) <= 1e-9 * (1.0 + norm(g) * norm(v)))
            out.push_back(i);
    }
    return out;
}

bool is_subset(const std::vector<std::size_t>& a,
               const std::vector<std::size_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// the argmax face of the curvature objective over the multiplier set,
// assuming the direction was already validated.  The objective is scaled to
// unit norm: the face is invariant under positive scaling and the face
// system would otherwise be ill-conditioned for near-axis directions whose
// curvatures are tiny.
FaceResult face_for_direction(const PointData& pd, const MultiplierSet& ms,
                              const Vec& v, const AnalysisConfig& cfg) {
    Vec c(ms.polyhedron.signs.size(), 0.0);
    for (std::size_t g = 0; g < c.size(); ++g) c[g] = curvature(pd, g, v);
    double nc = norm(c);
    if (nc > 1e-300) c = scaled(c, 1.0 / nc);
    return argmax_face_vertices(c, ms.polyhedron, cfg.lpPivotTol);
}

bool near_equal(const Vec& a, const Vec& b, double tol) {
    if (a.size() != b.size()) return false;
    return norm(sub(a, b)) <= tol * (1.0 + std::max(norm(a), norm(b)));
}

struct SectionMap {
    // lifted coordinates for a normalized multiplier section.  Equality
    // multipliers in the normalized block are split into a - b.
    SignedPolyhedron poly;
    std::vector<std::size_t> colOwner;   // global constraint index per column
    std::vector<double> colFactor;       // +1 or -1
    std::size_t normRow = 0;
};

Vec section_to_lambda(const SectionMap& sm, const Vec& y, std::size_t l) {
    Vec lambda(l, 0.0);
    for (std::size_t c = 0; c < y.size(); ++c)
        lambda[sm.colOwner[c]] += sm.colFactor[c] * y[c];
    return lambda;
}

// {lambda in N_Theta(q(xbar)) : grad q^T lambda = 0, l1-norm over the
// normalized block = 1}, lifted so every coordinate is sign-constrained.
// extraRow appends one more equality row (coefficients per lifted column).
SectionMap normalized_multiplier_section(
    const PointData& pd, const ActiveSet& act,
    const std::vector<std::size_t>& eqNormalized,
    const std::vector<std::size_t>& ineqNormalized) {
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);

    SectionMap sm;
    std::vector<SignKind> signs;
    std::vector<bool> eqNorm(l1, false);
    for (std::size_t e : eqNormalized) eqNorm[e] = true;
    std::vector<bool> ineqNorm(pd.inequalities.size(), false);
    for (std::size_t i : ineqNormalized) ineqNorm[i] = true;

    for (std::size_t e = 0; e < l1; ++e) {
        if (eqNorm[e]) {
            sm.colOwner.push_back(e);
            sm.colFactor.push_back(1.0);
            signs.push_back(SignKind::NonNeg);
            sm.colOwner.push_back(e);
            sm.colFactor.push_back(-1.0);
            signs.push_back(SignKind::NonNeg);
        } else {
            sm.colOwner.push_back(e);
            sm.colFactor.push_back(1.0);
            signs.push_back(SignKind::Free);
        }
    }
    for (std::size_t i : act.inequalities) {
        sm.colOwner.push_back(l1 + i);
        sm.colFactor.push_back(1.0);
        signs.push_back(SignKind::NonNeg);
    }

    const std::size_t cols = sm.colOwner.size();
    Mat A(n + 1, cols, 0.0);
    Vec b(n + 1, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        const Vec& g = constraint_at(pd, sm.colOwner[c]).gradient;
        for (std::size_t j = 0; j < n; ++j) A(j, c) = sm.colFactor[c] * g[j];
    }
    sm.normRow = n;
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t owner = sm.colOwner[c];
        bool normalized = owner < l1
                              ? eqNorm[owner]
                              : ineqNorm[owner - l1];
        A(n, c) = normalized ? 1.0 : 0.0;
    }
    b[n] = 1.0;
    sm.poly = SignedPolyhedron{A, b, signs};
    return sm;
}

}  // namespace

// ---------------------------------------------------------------------------

ActiveSet active_set(const PointData& pd, double activeTol) {
    ActiveSet a;
    for (std::size_t e = 0; e < pd.equalities.size(); ++e)
        a.equalities.push_back(e);
    for (std::size_t i = 0; i < pd.inequalities.size(); ++i)
        if (pd.inequalities[i].value >= -activeTol) a.inequalities.push_back(i);
    return a;
}

MultiplierSet multiplier_set(const PointData& pd, const Vec& xstar,
                             const ActiveSet& act, const AnalysisConfig& cfg) {
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    const std::size_t l = l1 + pd.inequalities.size();

    MultiplierSet ms;
    ms.xstar = xstar;
    ms.active = act;

    Mat A(n, l, 0.0);
    for (std::size_t g = 0; g < l; ++g) {
        const Vec& grad = constraint_at(pd, g).gradient;
        for (std::size_t j = 0; j < n; ++j) A(j, g) = grad[j];
    }
    std::vector<SignKind> signs(l, SignKind::Zero);
    for (std::size_t e = 0; e < l1; ++e) signs[e] = SignKind::Free;
    for (std::size_t i : act.inequalities) signs[l1 + i] = SignKind::NonNeg;
    ms.polyhedron = SignedPolyhedron{A, xstar, signs};

    LPResult lp = solve_lp(Vec(l, 0.0), ms.polyhedron, false, cfg.lpPivotTol);
    ms.feasible = lp.status == LPStatus::Optimal;
    if (!ms.feasible) return ms;

    ms.residual = norm(sub(A * lp.vertexSolution, xstar));
    ms.generators = enumerate_vertices(ms.polyhedron);
    for (const Vec& v : ms.generators.vertices)
        ms.vertexSupport.push_back(i_plus(pd, v, cfg.strictTol));
    return ms;
}

std::vector<std::size_t> i_plus(const PointData& pd, const Vec& lambda,
                                double strictTol) {
    const std::size_t l1 = eq_count(pd);
    double thr = strictTol * (1.0 + norm(lambda));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pd.inequalities.size(); ++i)
        if (lambda[l1 + i] > thr) out.push_back(i);
    return out;
}

std::vector<std::size_t> i_plus_union(const PointData& pd,
                                      const MultiplierSet& ms,
                                      const AnalysisConfig& cfg) {
    std::vector<std::size_t> out;
    if (!ms.feasible) return out;
    const std::size_t l1 = eq_count(pd);
    const std::size_t l = ms.polyhedron.signs.size();
    for (std::size_t i : ms.active.inequalities) {
        Vec c(l, 0.0);
        c[l1 + i] = 1.0;
        LPResult lp = solve_lp(c, ms.polyhedron, true, cfg.lpPivotTol);
        bool member = lp.status == LPStatus::Unbounded ||
                      (lp.status == LPStatus::Optimal &&
                       lp.optimalValue > cfg.strictTol);
        if (member) out.push_back(i);
    }
    return out;
}

LicqResult check_licq(const PointData& pd, const ActiveSet& act,
                      const AnalysisConfig& cfg) {
    LicqResult r;
    Mat rows = gradient_rows(pd, active_globals(pd, act));
    r.rowCount = rows.rows();
    r.rank = rank_and_nullspace(rows, cfg.rankTol).rank;
    r.holds = r.rank == r.rowCount;
    return r;
}

MfcqResult check_mfcq(const PointData& pd, const ActiveSet& act,
                      const AnalysisConfig& cfg) {
    MfcqResult r;
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    Mat eqRows = equality_rows(pd);
    r.equalityGradientsIndependent =
        l1 == 0 || rank_and_nullspace(eqRows, cfg.rankTol).rank == l1;

    const auto& actIneq = act.inequalities;
    bool coneTrivial = true;
    if (!actIneq.empty()) {
        // positive linear dependence test: mu free on E, lambda >= 0 on the
        // active inequalities, sum lambda = 1, grad q^T (mu, lambda) = 0
        const std::size_t cols = l1 + actIneq.size();
        Mat A(n + 1, cols, 0.0);
        Vec b(n + 1, 0.0);
        for (std::size_t e = 0; e < l1; ++e)
            for (std::size_t j = 0; j < n; ++j)
                A(j, e) = pd.equalities[e].gradient[j];
        for (std::size_t k = 0; k < actIneq.size(); ++k) {
            const Vec& g = pd.inequalities[actIneq[k]].gradient;
            for (std::size_t j = 0; j < n; ++j) A(j, l1 + k) = g[j];
            A(n, l1 + k) = 1.0;
        }
        b[n] = 1.0;
        std::vector<SignKind> signs(cols, SignKind::NonNeg);
        for (std::size_t e = 0; e < l1; ++e) signs[e] = SignKind::Free;
        SignedPolyhedron P{A, b, signs};
        LPResult lp = solve_lp(Vec(cols, 0.0), P, false, cfg.lpPivotTol);
        if (lp.status == LPStatus::Optimal) {
            coneTrivial = false;
            Vec w(l1 + pd.inequalities.size(), 0.0);
            for (std::size_t e = 0; e < l1; ++e) w[e] = lp.vertexSolution[e];
            for (std::size_t k = 0; k < actIneq.size(); ++k)
                w[l1 + actIneq[k]] = lp.vertexSolution[l1 + k];
            double n1 = norm1(w);
            if (n1 > 0) w = scaled(w, 1.0 / n1);
            r.failureWitness = w;
        }
    }
    r.holds = r.equalityGradientsIndependent && coneTrivial;

    // modulus estimate: largest 1/||grad q^T lambda|| over the normalized
    // section, searched with Frank-Wolfe from every simplex corner.  Not a
    // certificate, only a diagnostic.
    double worst = 0.0;
    if (l1 > 0) {
        double smin = min_singular_value(eqRows);
        worst = smin > 1e-14 ? 1.0 / smin : kInf;
    }
    if (!actIneq.empty() && r.holds) {
        // project out the equality range, then minimize the residual norm
        std::vector<Vec> eqGrads;
        for (const auto& c : pd.equalities) eqGrads.push_back(c.gradient);
        Mat Q = orthonormal_columns(eqGrads, n);
        auto project = [&](const Vec& y) {
            Vec out = y;
            for (std::size_t c = 0; c < Q.cols(); ++c) {
                Vec qc = Q.col(c);
                out = sub(out, scaled(qc, dot(qc, out)));
            }
            return out;
        };
        const std::size_t m = actIneq.size();
        auto value = [&](const Vec& lam) {
            Vec y(n, 0.0);
            for (std::size_t k = 0; k < m; ++k)
                y = add(y, scaled(pd.inequalities[actIneq[k]].gradient, lam[k]));
            Vec p = project(y);
            return dot(p, p);
        };
        double best = kInf;
        for (std::size_t start = 0; start <= m; ++start) {
            Vec lam(m, start == m ? 1.0 / static_cast<double>(m) : 0.0);
            if (start < m) lam[start] = 1.0;
            for (int it = 0; it < 200; ++it) {
                // gradient of the quadratic at lam
                Vec y(n, 0.0);
                for (std::size_t k = 0; k < m; ++k)
                    y = add(y,
                            scaled(pd.inequalities[actIneq[k]].gradient, lam[k]));
                Vec p = project(y);
                Vec grad(m, 0.0);
                for (std::size_t k = 0; k < m; ++k)
                    grad[k] =
                        2.0 * dot(pd.inequalities[actIneq[k]].gradient, p);
                std::size_t pick = 0;
                for (std::size_t k = 1; k < m; ++k)
                    if (grad[k] < grad[pick]) pick = k;
                double step = 2.0 / (it + 2.0);
                for (std::size_t k = 0; k < m; ++k)
                    lam[k] = (1.0 - step) * lam[k] + (k == pick ? step : 0.0);
            }
            best = std::min(best, value(lam));
        }
        if (best > 1e-16) worst = std::max(worst, 1.0 / std::sqrt(best));
        else worst = kInf;
    }
    r.modulusEstimate = worst;
    r.estimateCertified = false;
    return r;
}

CrcqResult check_crcq_sampled(const ProblemSpec& problem, const PointData& pd,
                              const ActiveSet& act, double radius,
                              std::size_t sampleCount, std::size_t subsetCap) {
    CrcqResult r;
    r.radius = radius;
    std::vector<std::size_t> globals = active_globals(pd, act);
    const std::size_t m = globals.size();
    if (m == 0) {
        r.status = SampledStatus::HoldsSampled;
        return r;
    }

    std::vector<PointData> samples;
    for (const Vec& d : halton_ball(pd.x.size(), sampleCount)) {
        Vec x = add(pd.x, scaled(d, radius));
        try {
            samples.push_back(eval_point(problem, x));
        } catch (const DomainError&) {
        }
    }

    bool witnessFound = false;
    bool complete = subsets_ascending(
        m, subsetCap,
        [&](const std::vector<std::size_t>& pick) {
            std::vector<std::size_t> sub;
            for (std::size_t p : pick) sub.push_back(globals[p]);
            Mat rows0 = gradient_rows(pd, sub);
            std::size_t rank0 = rank_and_nullspace(rows0).rank;
            for (const PointData& s : samples) {
                Mat rows = gradient_rows(s, sub);
                std::size_t rk = rank_and_nullspace(rows).rank;
                if (rk != rank0) {
                    r.status = SampledStatus::FailsWithWitness;
                    r.witnessSubset = sub;
                    r.witnessPoint = s.x;
                    r.rankAtPoint = rk;
                    r.rankAtCandidate = rank0;
                    witnessFound = true;
                    return false;
                }
            }
            return true;
        },
        false);
    r.subsetsTruncated = !complete && !witnessFound;
    if (!witnessFound) r.status = SampledStatus::HoldsSampled;
    return r;
}

MscqResult check_mscq_sampled(const ProblemSpec& problem, const PointData& pd,
                              double radius, std::size_t sampleCount) {
    MscqResult r;
    const std::size_t shells = 6;
    const std::size_t perShell = std::max<std::size_t>(1, sampleCount / shells);
    // the same directions are reused on every shell so that the ratio
    // between consecutive shells isolates the radius dependence instead of
    // mixing in direction-to-direction variation
    std::vector<Vec> dirs = halton_sphere(pd.x.size(), perShell);
    r.shellKappa.assign(shells, 0.0);

    for (std::size_t k = 0; k < shells; ++k) {
        double rk = radius * std::pow(2.0, -static_cast<double>(k));
        for (const Vec& d : dirs) {
            Vec x = add(pd.x, scaled(d, rk));
            PointData s;
            try {
                s = eval_point(problem, x);
            } catch (const DomainError&) {
                continue;
            }
            double resid = violation_measure(s);
            if (resid <= 1e-12) continue;
            std::optional<double> dist = distance_to_feasible(problem, x);
            if (!dist) continue;
            r.shellKappa[k] = std::max(r.shellKappa[k], *dist / resid);
        }
    }

    r.kappaEstimate = 0.0;
    bool blowup = false;
    for (std::size_t k = 0; k < shells; ++k) {
        r.kappaEstimate = std::max(r.kappaEstimate, r.shellKappa[k]);
        if (k + 1 < shells && r.shellKappa[k] > 1e-12 &&
            r.shellKappa[k + 1] > r.growthLimit * r.shellKappa[k])
            blowup = true;
    }
    r.status = blowup ? SampledStatus::Inconclusive : SampledStatus::HoldsSampled;
    return r;
}

BeppResult check_bepp_sampled(const ProblemSpec& problem, const PointData& pd,
                              double radius, std::size_t sampleCount) {
    BeppResult r;
    const std::size_t l1 = eq_count(pd);
    Mat eqRows = equality_rows(pd);
    r.equalityGradientsIndependent =
        l1 == 0 || rank_and_nullspace(eqRows).rank == l1;
    if (!r.equalityGradientsIndependent) {
        r.status = SampledStatus::FailsWithWitness;
        return r;
    }

    const std::size_t shells = 6;
    const std::size_t perShell = std::max<std::size_t>(1, sampleCount / shells);
    // same directions on every shell; see check_mscq_sampled
    std::vector<Vec> dirs = halton_sphere(pd.x.size(), perShell);
    r.shellEstimate.assign(shells, 0.0);

    auto scan_point = [&](const PointData& s, double activity, double& slot) {
        std::vector<std::size_t> nearActive;
        for (std::size_t i = 0; i < s.inequalities.size(); ++i)
            if (std::abs(s.inequalities[i].value) <= activity)
                nearActive.push_back(i);
        std::vector<std::size_t> eqGlobals;
        for (std::size_t e = 0; e < l1; ++e) eqGlobals.push_back(e);
        subsets_ascending(
            nearActive.size(), 4096,
            [&](const std::vector<std::size_t>& pick) {
                std::vector<std::size_t> globals = eqGlobals;
                for (std::size_t p : pick)
                    globals.push_back(l1 + nearActive[p]);
                if (globals.empty()) return true;
                Mat rows = gradient_rows(s, globals);
                if (rank_and_nullspace(rows).rank != rows.rows()) return true;
                double smin = min_singular_value(rows);
                if (smin > 1e-14) slot = std::max(slot, 1.0 / smin);
                return true;
            },
            l1 > 0);
    };

    scan_point(pd, 1e-8, r.shellEstimate[0]);
    for (std::size_t k = 0; k < shells; ++k) {
        double rk = radius * std::pow(2.0, -static_cast<double>(k));
        for (const Vec& d : dirs) {
            Vec x = add(pd.x, scaled(d, rk));
            try {
                PointData s = eval_point(problem, x);
                scan_point(s, rk, r.shellEstimate[k]);
            } catch (const DomainError&) {
            }
        }
    }

    bool blowup = false;
    for (std::size_t k = 0; k < shells; ++k) {
        r.estimate = std::max(r.estimate, r.shellEstimate[k]);
        if (k + 1 < shells && r.shellEstimate[k] > 1e-12 &&
            r.shellEstimate[k + 1] > r.growthLimit * r.shellEstimate[k])
            blowup = true;
    }
    r.status = blowup ? SampledStatus::Inconclusive : SampledStatus::HoldsSampled;
    return r;
}

SoscmsResult check_soscms(const PointData& pd, const ActiveSet& act,
                          const ConstraintPartition& partition,
                          const std::vector<Vec>& directionCandidates,
                          const AnalysisConfig& cfg) {
    SoscmsResult r;
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    const std::size_t l = l1 + pd.inequalities.size();

    for (std::size_t e : partition.equalitiesNormalized)
        if (e >= l1)
            throw std::invalid_argument(
                "partition names equality index out of range");
    for (std::size_t i : partition.inequalitiesNormalized)
        if (std::find(act.inequalities.begin(), act.inequalities.end(), i) ==
            act.inequalities.end())
            throw std::invalid_argument(
                "partition names an inactive or out-of-range inequality");

    // linearized tangent cone {u : grad q_E u = 0, grad q_act u <= 0}
    const std::size_t mAct = act.inequalities.size();
    Mat A(l1 + mAct, n + mAct, 0.0);
    for (std::size_t e = 0; e < l1; ++e)
        for (std::size_t j = 0; j < n; ++j)
            A(e, j) = pd.equalities[e].gradient[j];
    for (std::size_t k = 0; k < mAct; ++k) {
        const Vec& g = pd.inequalities[act.inequalities[k]].gradient;
        for (std::size_t j = 0; j < n; ++j) A(l1 + k, j) = g[j];
        A(l1 + k, n + k) = 1.0;
    }
    std::vector<SignKind> signs(n + mAct, SignKind::NonNeg);
    for (std::size_t j = 0; j < n; ++j) signs[j] = SignKind::Free;
    VertexSet cone =
        cone_extreme_rays(SignedPolyhedron{A, Vec(l1 + mAct, 0.0), signs});

    std::vector<Vec> rays;
    for (const Vec& ry : cone.rays) {
        Vec u(ry.begin(), ry.begin() + n);
        double nu = norm(u);
        if (nu > 1e-12) rays.push_back(scaled(u, 1.0 / nu));
    }
    std::vector<Vec> linCols;
    for (const Vec& full : cone.lineality)
        linCols.emplace_back(full.begin(), full.begin() + n);

    SectionMap sm = normalized_multiplier_section(
        pd, act, partition.equalitiesNormalized,
        partition.inequalitiesNormalized);

    std::vector<std::size_t> normGlobals;
    for (std::size_t e : partition.equalitiesNormalized) normGlobals.push_back(e);
    for (std::size_t i : partition.inequalitiesNormalized)
        normGlobals.push_back(l1 + i);
    auto norm_block = [&](const Vec& lambda) {
        double s = 0.0;
        for (std::size_t g : normGlobals) s += std::abs(lambda[g]);
        return s;
    };

    LPResult sectionFeasible =
        solve_lp(Vec(sm.poly.signs.size(), 0.0), sm.poly, false, cfg.lpPivotTol);
    if (sectionFeasible.status != LPStatus::Optimal) {
        r.status = SoscmsStatus::Holds;
        r.exact = true;
        r.note = "no multiplier with unit normalized block";
        return r;
    }

    if (rays.empty()) {
        // the cone is a subspace; eigenvalues over its basis decide exactly
        Mat B = orthonormal_columns(linCols, n);
        r.exact = true;
        if (B.cols() == 0) {
            r.status = SoscmsStatus::Holds;
            r.note = "linearized cone is trivial";
            return r;
        }
        VertexSet section = enumerate_vertices(sm.poly);
        if (section.vertices.empty()) {
            r.status = SoscmsStatus::Inconclusive;
            r.note = "normalized multiplier section has no extreme points";
            return r;
        }
        auto reduced_of = [&](const Vec& lambda) {
            return reduce(B, constraint_hessian_sum(pd, lambda));
        };
        Vec lambda0 = section_to_lambda(sm, section.vertices.front(), l);
        auto finish_witness = [&](Vec lambda) {
            Mat H = reduced_of(lambda);
            EigenDecomposition eig = sym_eig(H);
            Vec w = eig.vectors.col(B.cols() - 1);
            Vec u(n, 0.0);
            for (std::size_t c = 0; c < B.cols(); ++c)
                u = add(u, scaled(B.col(c), w[c]));
            double nb = norm_block(lambda);
            if (nb > 1e-9) lambda = scaled(lambda, 1.0 / nb);
            r.status = SoscmsStatus::FailsWithWitness;
            r.witnessDirection = scaled(u, 1.0 / norm(u));
            r.witnessMultiplier = lambda;
        };
        for (const Vec& y : section.vertices) {
            Vec lambda = section_to_lambda(sm, y, l);
            double maxE = max_eigenvalue(reduced_of(lambda));
            if (maxE >= -cfg.strictTol) {
                finish_witness(lambda);
                return r;
            }
        }
        // recession check: the form must not grow along any unbounded
        // direction of the section, else walking far enough yields a witness
        double base = frobenius_norm(reduced_of(lambda0)) + 1.0;
        std::vector<Vec> recession;
        for (const Vec& y : section.rays) recession.push_back(y);
        for (const Vec& y : section.lineality) {
            recession.push_back(y);
            recession.push_back(scaled(y, -1.0));
        }
        for (const Vec& y : recession) {
            Vec rho = section_to_lambda(sm, y, l);
            double maxE = max_eigenvalue(reduced_of(rho));
            if (maxE > cfg.strictTol) {
                double T = (base + 1.0) / maxE;
                finish_witness(add(lambda0, scaled(rho, T)));
                return r;
            }
        }
        r.status = SoscmsStatus::Holds;
        return r;
    }

    // genuine cone: test candidate directions with a feasibility LP each
    auto in_cone = [&](const Vec& u) {
        for (std::size_t e = 0; e < l1; ++e) {
            const Vec& g = pd.equalities[e].gradient;
            if (std::abs(dot(g, u)) > 1e-9 * (1.0 + norm(g))) return false;
        }
        for (std::size_t i : act.inequalities) {
            const Vec& g = pd.inequalities[i].gradient;
            if (dot(g, u) > 1e-9 * (1.0 + norm(g))) return false;
        }
        return true;
    };

    std::vector<Vec> candidates;
    auto push_candidate = [&](Vec u) {
        double nu = norm(u);
        if (nu <= 1e-12) return;
        u = scaled(u, 1.0 / nu);
        if (!in_cone(u)) return;
        for (const Vec& c : candidates)
            if (std::abs(std::abs(dot(c, u)) - 1.0) < 1e-9) return;
        candidates.push_back(u);
    };
    std::vector<Vec> gens = rays;
    for (const Vec& c : linCols) gens.push_back(c);
    for (const Vec& g : rays) push_candidate(g);
    for (const Vec& c : linCols) {
        push_candidate(c);
        push_candidate(scaled(c, -1.0));
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            push_candidate(add(gens[i], gens[j]));
            push_candidate(sub(gens[i], gens[j]));
        }
    Mat span = orthonormal_columns(gens, n);
    for (const Vec& u : sphere_directions(span, cfg.sphereSampleCount))
        push_candidate(u);
    for (const Vec& u : directionCandidates) push_candidate(u);

    for (const Vec& u : candidates) {
        // multipliers admissible for u must vanish on active inequalities
        // that decrease strictly along u (directional complementarity)
        std::vector<std::size_t> pinned;
        for (std::size_t i : act.inequalities) {
            const Vec& g = pd.inequalities[i].gradient;
            if (dot(g, u) < -1e-9 * (1.0 + norm(g))) pinned.push_back(l1 + i);
        }
        // feasibility of: section rows, complementarity pins, plus
        // sum lambda_g <u, hess q_g u> >= 0
        SignedPolyhedron P = sm.poly;
        const std::size_t cols = P.signs.size();
        Mat A2(P.Aeq.rows() + 1 + pinned.size(), cols + 1, 0.0);
        for (std::size_t i = 0; i < P.Aeq.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) A2(i, j) = P.Aeq(i, j);
        for (std::size_t j = 0; j < cols; ++j)
            A2(P.Aeq.rows(), j) =
                sm.colFactor[j] * curvature(pd, sm.colOwner[j], u);
        A2(P.Aeq.rows(), cols) = -1.0;  // slack for ">= 0"
        for (std::size_t p = 0; p < pinned.size(); ++p)
            for (std::size_t j = 0; j < cols; ++j)
                if (sm.colOwner[j] == pinned[p])
                    A2(P.Aeq.rows() + 1 + p, j) = 1.0;
        Vec b2 = P.beq;
        b2.push_back(0.0);
        for (std::size_t p = 0; p < pinned.size(); ++p) b2.push_back(0.0);
        std::vector<SignKind> signs2 = P.signs;
        signs2.push_back(SignKind::NonNeg);
        LPResult lp = solve_lp(Vec(cols + 1, 0.0),
                               SignedPolyhedron{A2, b2, signs2}, false,
                               cfg.lpPivotTol);
        if (lp.status == LPStatus::Optimal) {
            Vec y(lp.vertexSolution.begin(),
                  lp.vertexSolution.begin() + cols);
            Vec lambda = section_to_lambda(sm, y, l);
            double nb = norm_block(lambda);
            if (nb <= 1e-9) {
                r.note = "degenerate section witness skipped";
                continue;
            }
            r.status = SoscmsStatus::FailsWithWitness;
            r.witnessDirection = u;
            r.witnessMultiplier = scaled(lambda, 1.0 / nb);
            r.exact = false;
            return r;
        }
    }
    r.exact = rays.size() == 1 && linCols.empty();
    r.status = r.exact ? SoscmsStatus::Holds : SoscmsStatus::HoldsSampled;
    return r;
}

CriticalCone critical_cone(const PointData& pd, const Vec& xstar,
                           const MultiplierSet& ms, const AnalysisConfig& cfg) {
    (void)xstar;  // encoded in ms
    CriticalCone K;
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);

    std::vector<std::size_t> unionSupport = i_plus_union(pd, ms, cfg);
    for (std::size_t e = 0; e < l1; ++e) K.equalityRows.push_back(e);
    for (std::size_t i : unionSupport) K.equalityRows.push_back(l1 + i);
    for (std::size_t i : ms.active.inequalities)
        if (std::find(unionSupport.begin(), unionSupport.end(), i) ==
            unionSupport.end())
            K.inequalityRows.push_back(l1 + i);

    const std::size_t mE = K.equalityRows.size();
    const std::size_t mI = K.inequalityRows.size();
    Mat A(mE + mI, n + mI, 0.0);
    for (std::size_t r = 0; r < mE; ++r) {
        const Vec& g = constraint_at(pd, K.equalityRows[r]).gradient;
        for (std::size_t j = 0; j < n; ++j) A(r, j) = g[j];
    }
    for (std::size_t r = 0; r < mI; ++r) {
        const Vec& g = constraint_at(pd, K.inequalityRows[r]).gradient;
        for (std::size_t j = 0; j < n; ++j) A(mE + r, j) = g[j];
        A(mE + r, n + r) = 1.0;
    }
    std::vector<SignKind> signs(n + mI, SignKind::NonNeg);
    for (std::size_t j = 0; j < n; ++j) signs[j] = SignKind::Free;
    VertexSet lifted =
        cone_extreme_rays(SignedPolyhedron{A, Vec(mE + mI, 0.0), signs});

    for (const Vec& ry : lifted.rays) {
        Vec u(ry.begin(), ry.begin() + n);
        double nu = norm(u);
        if (nu > 1e-12) K.generators.rays.push_back(scaled(u, 1.0 / nu));
    }
    std::vector<Vec> linCols;
    for (const Vec& full : lifted.lineality)
        linCols.emplace_back(full.begin(), full.begin() + n);
    K.generators.lineality = orthonormal_vecs(linCols);

    std::vector<Vec> span = K.generators.rays;
    for (const Vec& c : K.generators.lineality) span.push_back(c);
    K.dimension =
        span.empty() ? 0 : rank_and_nullspace(Mat::from_rows(span, n)).rank;
    return K;
}

bool cone_contains(const PointData& pd, const CriticalCone& K, const Vec& v,
                   double tol) {
    for (std::size_t g : K.equalityRows) {
        const Vec& grad = constraint_at(pd, g).gradient;
        if (std::abs(dot(grad, v)) > tol * (1.0 + norm(grad) * norm(v)))
            return false;
    }
    for (std::size_t g : K.inequalityRows) {
        const Vec& grad = constraint_at(pd, g).gradient;
        if (dot(grad, v) > tol * (1.0 + norm(grad) * norm(v))) return false;
    }
    return true;
}

DirectionalMultipliers directional_multipliers(const PointData& pd,
                                               const MultiplierSet& ms,
                                               const Vec& v,
                                               const AnalysisConfig& cfg) {
    const std::size_t l1 = eq_count(pd);
    std::vector<std::size_t> unionSupport = i_plus_union(pd, ms, cfg);
    // membership in the critical cone, from its H-description
    for (std::size_t e = 0; e < l1; ++e) {
        const Vec& g = pd.equalities[e].gradient;
        if (std::abs(dot(g, v)) > 1e-9 * (1.0 + norm(g) * norm(v)))
            throw std::invalid_argument("direction leaves the critical cone");
    }
    for (std::size_t i : ms.active.inequalities) {
        const Vec& g = pd.inequalities[i].gradient;
        double s = dot(g, v);
        bool supported = std::find(unionSupport.begin(), unionSupport.end(),
                                   i) != unionSupport.end();
        double tol = 1e-9 * (1.0 + norm(g) * norm(v));
        if ((supported && std::abs(s) > tol) || (!supported && s > tol))
            throw std::invalid_argument("direction leaves the critical cone");
    }

    DirectionalMultipliers dm;
    dm.direction = v;
    dm.face = face_for_direction(pd, ms, v, cfg);
    dm.unboundedObjective = dm.face.lpStatus == LPStatus::Unbounded;
    return dm;
}

std::vector<Vec> sphere_directions(const Mat& basis, std::size_t count) {
    const std::size_t d = basis.cols();
    const std::size_t n = basis.rows();
    std::vector<Vec> out;
    if (d == 0 || count == 0) return out;
    auto lift = [&](const Vec& coeff) {
        Vec u(n, 0.0);
        for (std::size_t c = 0; c < d; ++c)
            u = add(u, scaled(basis.col(c), coeff[c]));
        return u;
    };
    const double golden = 0.6180339887498949;
    if (d == 1) {
        out.push_back(lift({1.0}));
        out.push_back(lift({-1.0}));
    } else if (d == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            double t = 2.0 * M_PI * std::fmod(k * golden, 1.0);
            out.push_back(lift({std::cos(t), std::sin(t)}));
        }
    } else if (d == 3) {
        for (std::size_t k = 0; k < count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / static_cast<double>(count);
            double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            double t = 2.0 * M_PI * std::fmod(k * golden, 1.0);
            out.push_back(lift({rho * std::cos(t), rho * std::sin(t), z}));
        }
    } else {
        std::mt19937_64 gen(2654435761u);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t k = 0; k < count; ++k) {
            Vec coeff(d);
            for (std::size_t c = 0; c < d; ++c) coeff[c] = gauss(gen);
            double nc = norm(coeff);
            if (nc < 1e-12) {
                --k;
                continue;
            }
            out.push_back(lift(scaled(coeff, 1.0 / nc)));
        }
    }
    return out;
}

ExtremeMultipliers lambda_bar_E(const PointData& pd, const MultiplierSet& ms,
                                const CriticalCone& K,
                                const AnalysisConfig& cfg) {
    ExtremeMultipliers out;
    if (K.isZero()) {
        out.exact = true;
        return out;
    }

    const std::size_t rayCount = K.generators.rays.size();
    const std::size_t linCount = K.generators.lineality.size();
    out.exact = (rayCount == 1 && linCount == 0) ||
                (rayCount == 0 && linCount == 1);

    std::vector<Vec> candidates;
    auto push_candidate = [&](Vec u) {
        double nu = norm(u);
        if (nu <= 1e-12) return;
        u = scaled(u, 1.0 / nu);
        if (!cone_contains(pd, K, u)) return;
        for (const Vec& c : candidates)
            if (std::abs(std::abs(dot(c, u)) - 1.0) < 1e-9) return;
        candidates.push_back(u);
    };
    std::vector<Vec> gens = K.generators.rays;
    for (const Vec& c : K.generators.lineality) gens.push_back(c);
    for (const Vec& g : K.generators.rays) push_candidate(g);
    for (const Vec& c : K.generators.lineality) {
        push_candidate(c);
        push_candidate(scaled(c, -1.0));
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) {
            push_candidate(add(gens[i], gens[j]));
            push_candidate(sub(gens[i], gens[j]));
        }
    Mat span = orthonormal_columns(gens, pd.x.size());
    for (const Vec& u : sphere_directions(span, cfg.sphereSampleCount))
        push_candidate(u);

    for (const Vec& v : candidates) {
        FaceResult face = face_for_direction(pd, ms, v, cfg);
        out.directionsUsed.push_back(v);
        if (face.lpStatus == LPStatus::Unbounded) {
            out.anyUnbounded = true;
            continue;
        }
        if (face.lpStatus != LPStatus::Optimal) continue;
        if (face.face.vertices.empty()) {
            out.facesVertexFree = true;
            continue;
        }
        for (const Vec& lam : face.face.vertices) {
            bool seen = false;
            for (const Vec& have : out.lambdas)
                if (near_equal(have, lam, cfg.dedupeTol)) {
                    seen = true;
                    break;
                }
            if (!seen) {
                out.lambdas.push_back(lam);
                out.witnessDirection.push_back(v);
            }
        }
    }
    return out;
}

ReducedHessianRecord reduced_hessian_record(const PointData& pd,
                                            const Vec& lambda,
                                            const AnalysisConfig& cfg) {
    ReducedHessianRecord rec;
    rec.lambda = lambda;
    const std::size_t l1 = eq_count(pd);
    for (std::size_t e = 0; e < l1; ++e) rec.support.push_back(e);
    for (std::size_t i : i_plus(pd, lambda, cfg.strictTol))
        rec.support.push_back(l1 + i);

    Mat rows = gradient_rows(pd, rec.support);
    rec.subspaceBasis = rank_and_nullspace(rows, cfg.rankTol).nullspace;
    if (rec.subspaceBasis.cols() == 0) {
        rec.minEigenvalue = kInf;
        rec.reduced = Mat(0, 0);
        return rec;
    }
    rec.reduced = reduce(rec.subspaceBasis, lagrangian_hessian(pd, lambda));
    MinEigResult me = sym_eig_min(rec.reduced);
    rec.minEigenvalue = me.value;
    Vec u(pd.x.size(), 0.0);
    for (std::size_t c = 0; c < rec.subspaceBasis.cols(); ++c)
        u = add(u, scaled(rec.subspaceBasis.col(c), me.vector[c]));
    rec.eigenvector = scaled(u, 1.0 / norm(u));
    return rec;
}

SufficiencyResult sufficient_condition(const PointData& pd,
                                       const ExtremeMultipliers& extremes,
                                       std::optional<double> kappa,
                                       const AnalysisConfig& cfg) {
    SufficiencyResult r;
    if (extremes.lambdas.empty()) {
        r.vacuous = true;
        r.holds = true;
        r.bound = 0.0;
        return r;
    }
    double threshold =
        kappa ? 1.0 / *kappa + cfg.strictTol : cfg.strictTol;
    r.holds = true;
    double worst = kInf;
    for (const Vec& lam : extremes.lambdas) {
        ReducedHessianRecord rec = reduced_hessian_record(pd, lam, cfg);
        if (rec.minEigenvalue <= threshold) r.holds = false;
        if (rec.minEigenvalue < worst) {
            worst = rec.minEigenvalue;
            r.worstIndex = r.records.size();
        }
        r.records.push_back(std::move(rec));
    }
    if (worst <= 0.0) r.bound = kInf;
    else if (std::isinf(worst)) r.bound = 0.0;
    else r.bound = 1.0 / worst;
    return r;
}

bool nondegenerate_in_direction(const DirectionalMultipliers& dm) {
    return !dm.unboundedObjective && dm.face.lpStatus == LPStatus::Optimal &&
           dm.face.face.vertices.size() == 1 && dm.face.face.rays.empty() &&
           dm.face.face.lineality.empty();
}

bool two_regularity(const PointData& pd,
                    const std::vector<std::size_t>& indices, const Vec& v,
                    const AnalysisConfig& cfg) {
    const std::size_t s = indices.size();
    if (s == 0) return true;
    const std::size_t n = pd.x.size();
    Mat G = gradient_rows(pd, indices);
    Mat N = rank_and_nullspace(G, cfg.rankTol).nullspace;
    const std::size_t k = N.cols();
    Mat GM(s, n + k, 0.0);
    for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t j = 0; j < n; ++j) GM(r, j) = G(r, j);
        const Mat& Q = constraint_at(pd, indices[r]).hessian;
        Vec Qv(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) Qv[i] += Q(i, j) * v[j];
        for (std::size_t c = 0; c < k; ++c) {
            double val = 0.0;
            for (std::size_t i = 0; i < n; ++i) val += Qv[i] * N(i, c);
            GM(r, n + c) = val;
        }
    }
    return rank_and_nullspace(GM, cfg.rankTol).rank == s;
}

DirectionalIndexSets xi_and_maximal_J(const PointData& pd,
                                      const ActiveSet& act, const Vec& v,
                                      std::size_t subsetCap,
                                      const AnalysisConfig& cfg) {
    DirectionalIndexSets out;
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    out.directionallyActive = directionally_active(pd, act, v);
    const auto& dir = out.directionallyActive;

    std::vector<std::size_t> weak;  // active but not directionally active
    for (std::size_t i : act.inequalities)
        if (std::find(dir.begin(), dir.end(), i) == dir.end())
            weak.push_back(i);

    auto curvature_of = [&](std::size_t g) { return curvature(pd, g, v); };

    auto test_member = [&](const std::vector<std::size_t>& J) {
        std::vector<std::size_t> strict;
        for (std::size_t i : dir)
            if (std::find(J.begin(), J.end(), i) == J.end())
                strict.push_back(i);
        const bool haveT = !strict.empty();
        const std::size_t rowCount =
            l1 + J.size() + strict.size() + weak.size();
        const std::size_t cols =
            n + (haveT ? 1 : 0) + strict.size() + weak.size();
        Mat A(rowCount, cols, 0.0);
        Vec b(rowCount, 0.0);
        std::size_t row = 0;
        auto fill_grad = [&](std::size_t g) {
            const Vec& grad = constraint_at(pd, g).gradient;
            for (std::size_t j = 0; j < n; ++j) A(row, j) = grad[j];
            b[row] = -curvature_of(g);
        };
        for (std::size_t e = 0; e < l1; ++e) {
            fill_grad(e);
            ++row;
        }
        for (std::size_t i : J) {
            fill_grad(l1 + i);
            ++row;
        }
        const std::size_t tCol = n;
        std::size_t slack = n + (haveT ? 1 : 0);
        for (std::size_t i : strict) {
            fill_grad(l1 + i);
            A(row, tCol) = 1.0;
            A(row, slack++) = 1.0;
            ++row;
        }
        for (std::size_t i : weak) {
            fill_grad(l1 + i);
            A(row, slack++) = 1.0;
            ++row;
        }
        std::vector<SignKind> signs(cols, SignKind::NonNeg);
        for (std::size_t j = 0; j < n; ++j) signs[j] = SignKind::Free;
        SignedPolyhedron P{A, b, signs};
        Vec c(cols, 0.0);
        if (haveT) c[tCol] = 1.0;
        LPResult lp = solve_lp(c, P, true, cfg.lpPivotTol);
        if (!haveT) return lp.status == LPStatus::Optimal;
        return lp.status == LPStatus::Unbounded ||
               (lp.status == LPStatus::Optimal &&
                lp.optimalValue > cfg.strictTol);
    };

    bool complete = subsets_ascending(
        dir.size(), subsetCap,
        [&](const std::vector<std::size_t>& pick) {
            std::vector<std::size_t> J;
            for (std::size_t p : pick) J.push_back(dir[p]);
            if (test_member(J)) out.members.push_back(J);
            return true;
        },
        true);
    out.truncated = !complete;

    for (const auto& J : out.members) {
        bool isMax = true;
        for (const auto& other : out.members)
            if (other.size() > J.size() && is_subset(J, other)) {
                isMax = false;
                break;
            }
        if (isMax) out.maximal.push_back(J);
    }
    return out;
}

NecessityResult necessity_applicability(const PointData& pd,
                                        const MultiplierSet& ms,
                                        const CriticalCone& K,
                                        const ExtremeMultipliers& extremes,
                                        const AnalysisConfig& cfg) {
    (void)K;
    NecessityResult res;
    res.exactDirections = extremes.exact;
    if (extremes.lambdas.empty()) {
        res.applicable = true;
        return res;
    }
    const std::size_t l1 = eq_count(pd);

    for (const Vec& v : extremes.directionsUsed) {
        NecessityDirectionRecord rec;
        rec.direction = v;
        FaceResult face = face_for_direction(pd, ms, v, cfg);
        DirectionalMultipliers dm;
        dm.direction = v;
        dm.face = face;
        dm.unboundedObjective = face.lpStatus == LPStatus::Unbounded;
        rec.nondegenerate = nondegenerate_in_direction(dm);

        DirectionalIndexSets dis;
        bool haveSets = false;

        for (const Vec& lam : face.face.vertices) {
            NecessityDirectionRecord::PerLambda per;
            per.lambda = lam;
            Vec HLv(pd.x.size(), 0.0);
            Mat HL = lagrangian_hessian(pd, lam);
            for (std::size_t i = 0; i < pd.x.size(); ++i)
                for (std::size_t j = 0; j < pd.x.size(); ++j)
                    HLv[i] += HL(i, j) * v[j];
            per.vQuadratic = dot(v, HLv);

            if (rec.nondegenerate) {
                per.covered = true;
                per.viaNondegeneracy = true;
            } else {
                if (!haveSets) {
                    dis = xi_and_maximal_J(pd, ms.active, v, cfg.subsetCap, cfg);
                    haveSets = true;
                }
                std::vector<std::size_t> support = i_plus(pd, lam, cfg.strictTol);
                for (const auto& jhat : dis.maximal) {
                    if (!is_subset(support, jhat)) continue;
                    std::vector<std::size_t> globals;
                    for (std::size_t e = 0; e < l1; ++e) globals.push_back(e);
                    for (std::size_t i : jhat) globals.push_back(l1 + i);
                    if (two_regularity(pd, globals, v, cfg)) {
                        per.covered = true;
                        per.viaTwoRegularity = true;
                        per.jHat = jhat;
                        break;
                    }
                }
            }
            rec.lambdas.push_back(std::move(per));
        }
        res.directions.push_back(std::move(rec));
    }

    res.applicable = true;
    for (const Vec& lam : extremes.lambdas) {
        bool covered = false;
        for (const auto& rec : res.directions) {
            for (const auto& per : rec.lambdas)
                if (per.covered && near_equal(per.lambda, lam, cfg.dedupeTol)) {
                    covered = true;
                    break;
                }
            if (covered) break;
        }
        if (!covered) {
            res.applicable = false;
            break;
        }
    }
    return res;
}

InnerMultiplierDirection strict_complementary_direction(
    const PointData& pd, const ActiveSet& act, const MultiplierSet& ms,
    const AnalysisConfig& cfg) {
    InnerMultiplierDirection out;
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    const std::size_t l = l1 + pd.inequalities.size();

    std::vector<std::size_t> unionSupport = i_plus_union(pd, ms, cfg);
    if (ms.generators.vertices.empty()) {
        out.lambdaTilde = Vec(l, 0.0);
        out.degenerate = true;
        return out;
    }
    if (unionSupport.empty()) {
        out.lambdaTilde = ms.generators.vertices.front();
    } else {
        Vec acc(l, 0.0);
        for (std::size_t i : unionSupport) {
            Vec c(l, 0.0);
            c[l1 + i] = 1.0;
            LPResult lp = solve_lp(c, ms.polyhedron, true, cfg.lpPivotTol);
            Vec pick = lp.status == LPStatus::Optimal
                           ? lp.vertexSolution
                           : ms.generators.vertices.front();
            if (lp.status == LPStatus::Unbounded && !lp.ray.empty()) {
                double rc = lp.ray[l1 + i];
                if (rc > 1e-12)
                    pick = add(pick, scaled(lp.ray, (1.0 + pick[l1 + i]) / rc));
            }
            acc = add(acc, pick);
        }
        out.lambdaTilde =
            scaled(acc, 1.0 / static_cast<double>(unionSupport.size()));
    }

    // maximize t subject to: gradients of E u union orthogonal to v, the
    // remaining active gradients at most -t, |v|_inf <= 1, t <= 1
    std::vector<std::size_t> strictRows;
    for (std::size_t i : act.inequalities)
        if (std::find(unionSupport.begin(), unionSupport.end(), i) ==
            unionSupport.end())
            strictRows.push_back(i);

    const std::size_t rowCount =
        l1 + unionSupport.size() + strictRows.size() + 2 * n + 1;
    const std::size_t cols = n + 1 + strictRows.size() + 2 * n + 1;
    Mat A(rowCount, cols, 0.0);
    Vec b(rowCount, 0.0);
    const std::size_t tCol = n;
    std::size_t slack = n + 1;
    std::size_t row = 0;
    auto fill_grad = [&](std::size_t g) {
        const Vec& grad = constraint_at(pd, g).gradient;
        for (std::size_t j = 0; j < n; ++j) A(row, j) = grad[j];
    };
    for (std::size_t e = 0; e < l1; ++e) {
        fill_grad(e);
        ++row;
    }
    for (std::size_t i : unionSupport) {
        fill_grad(l1 + i);
        ++row;
    }
    for (std::size_t i : strictRows) {
        fill_grad(l1 + i);
        A(row, tCol) = 1.0;
        A(row, slack++) = 1.0;
        ++row;
    }
    for (std::size_t j = 0; j < n; ++j) {
        A(row, j) = 1.0;
        A(row, slack++) = 1.0;
        b[row] = 1.0;
        ++row;
        A(row, j) = -1.0;
        A(row, slack++) = 1.0;
        b[row] = 1.0;
        ++row;
    }
    A(row, tCol) = 1.0;
    A(row, slack++) = 1.0;
    b[row] = 1.0;
    ++row;

    std::vector<SignKind> signs(cols, SignKind::NonNeg);
    for (std::size_t j = 0; j < n; ++j) signs[j] = SignKind::Free;
    Vec c(cols, 0.0);
    c[tCol] = 1.0;
    LPResult lp =
        solve_lp(c, SignedPolyhedron{A, b, signs}, true, cfg.lpPivotTol);
    if (lp.status == LPStatus::Optimal) {
        out.direction = Vec(lp.vertexSolution.begin(),
                            lp.vertexSolution.begin() + n);
        out.margin = lp.optimalValue;
    }
    out.degenerate = out.margin <= cfg.strictTol;
    return out;
}

CrcqCharacterization crcq_characterization(const PointData& pd,
                                           const MultiplierSet& ms,
                                           const CrcqResult& crcq,
                                           const CriticalCone& K,
                                           std::optional<double> kappa,
                                           const AnalysisConfig& cfg) {
    CrcqCharacterization out;
    const std::size_t l1 = eq_count(pd);
    if (crcq.status != SampledStatus::HoldsSampled) {
        out.reason = "constant rank of active gradients not established";
        return out;
    }
    Mat eqRows = equality_rows(pd);
    if (l1 > 0 && rank_and_nullspace(eqRows, cfg.rankTol).rank != l1) {
        out.reason = "equality gradients are dependent";
        return out;
    }
    if (K.isZero()) {
        out.reason = "critical cone is trivial";
        return out;
    }
    if (ms.generators.vertices.empty()) {
        out.reason = "multiplier set has no extreme points";
        return out;
    }

    InnerMultiplierDirection scd =
        strict_complementary_direction(pd, ms.active, ms, cfg);
    out.lambdaTilde = scd.lambdaTilde;

    std::vector<std::size_t> rows;
    for (std::size_t e = 0; e < l1; ++e) rows.push_back(e);
    for (std::size_t i : i_plus_union(pd, ms, cfg)) rows.push_back(l1 + i);
    Mat G = gradient_rows(pd, rows);
    out.subspaceBasis = rank_and_nullspace(G, cfg.rankTol).nullspace;
    if (out.subspaceBasis.cols() == 0) {
        out.reason = "reduction subspace is trivial";
        return out;
    }
    out.reduced = reduce(out.subspaceBasis, lagrangian_hessian(pd, out.lambdaTilde));
    out.minEigenvalue = sym_eig_min(out.reduced).value;

    // the reduced form should not depend on the multiplier
    double dev = 0.0;
    double scale = 1.0 + frobenius_norm(out.reduced);
    for (const Vec& lam : ms.generators.vertices) {
        Mat R = reduce(out.subspaceBasis, lagrangian_hessian(pd, lam));
        Mat D = R + scaled(out.reduced, -1.0);
        dev = std::max(dev, frobenius_norm(D) / scale);
    }
    for (const Vec& ray : ms.generators.rays) {
        Mat R = reduce(out.subspaceBasis, constraint_hessian_sum(pd, ray));
        dev = std::max(dev, frobenius_norm(R) / scale);
    }
    for (const Vec& lin : ms.generators.lineality) {
        Mat R = reduce(out.subspaceBasis, constraint_hessian_sum(pd, lin));
        dev = std::max(dev, frobenius_norm(R) / scale);
    }
    out.formDeviation = dev;
    out.formConstant = dev <= 1e-7;
    if (!out.formConstant) {
        out.reason = "reduced quadratic form varies across multipliers";
        return out;
    }

    out.applicable = true;
    double threshold = kappa ? 1.0 / *kappa + cfg.strictTol : cfg.strictTol;
    out.holds = out.minEigenvalue > threshold;
    out.bound = out.holds ? 1.0 / out.minEigenvalue : kInf;
    return out;
}

// ---------------------------------------------------------------------------
// constraint perturbation

namespace {

bool is_const(const ExprPtr& e, double v) {
    return e->op == Op::Const && e->constant == v;
}

ExprPtr fold(const ExprPtr& e,
             std::map<const ExprNode*, ExprPtr>& memo);

ExprPtr fold_children(Op op, const ExprPtr& a, const ExprPtr& b,
                      const ExprPtr& original) {
    // constant arithmetic
    bool constA = a && a->op == Op::Const;
    bool constB = b && b->op == Op::Const;
    auto rebuild = [&]() -> ExprPtr {
        switch (op) {
            case Op::Add: return make_add(a, b);
            case Op::Sub: return make_sub(a, b);
            case Op::Mul: return make_mul(a, b);
            case Op::Div: return make_div(a, b);
            case Op::Neg: return make_neg(a);
            case Op::Sqrt: return make_sqrt(a);
            case Op::Relu3: return make_relu3(a);
            case Op::Pow: return make_pow(a, original->exponent);
            default: return original;
        }
    };
    bool allConst = constA && (b == nullptr || constB);
    if (allConst) {
        try {
            ExprPtr node = rebuild();
            return make_const(eval_value(node, {}));
        } catch (const std::exception&) {
            return rebuild();
        }
    }
    switch (op) {
        case Op::Add:
            if (is_const(a, 0.0)) return b;
            if (is_const(b, 0.0)) return a;
            break;
        case Op::Sub:
            if (is_const(b, 0.0)) return a;
            if (is_const(a, 0.0)) return make_neg(b);
            break;
        case Op::Mul:
            if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
            if (is_const(a, 1.0)) return b;
            if (is_const(b, 1.0)) return a;
            break;
        case Op::Div:
            if (is_const(a, 0.0)) return make_const(0.0);
            if (is_const(b, 1.0)) return a;
            break;
        case Op::Pow:
            if (original->exponent == 0) return make_const(1.0);
            if (original->exponent == 1) return a;
            break;
        default:
            break;
    }
    return rebuild();
}

ExprPtr fold(const ExprPtr& e, std::map<const ExprNode*, ExprPtr>& memo) {
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    ExprPtr out;
    if (e->op == Op::Const || e->op == Op::Var) {
        out = e;
    } else {
        ExprPtr a = e->a ? fold(e->a, memo) : nullptr;
        ExprPtr b = e->b ? fold(e->b, memo) : nullptr;
        out = fold_children(e->op, a, b, e);
    }
    memo[e.get()] = out;
    return out;
}

ExprPtr folded(const ExprPtr& e) {
    std::map<const ExprNode*, ExprPtr> memo;
    return fold(e, memo);
}

}  // namespace

PerturbationResult perturb_problem(const ProblemSpec& problem,
                                   const PointData& pd, const Vec& lambda,
                                   const Vec& w, const Vec& v,
                                   const AnalysisConfig& cfg) {
    const std::size_t n = pd.x.size();
    const std::size_t l1 = eq_count(pd);
    const std::size_t l = l1 + pd.inequalities.size();
    if (lambda.size() != l || v.size() != n || w.size() != n)
        throw std::invalid_argument("perturbation input has wrong dimensions");
    double nv = norm(v);
    if (nv <= 1e-12) throw std::invalid_argument("direction is zero");
    Vec vn = scaled(v, 1.0 / nv);

    // lambda must be a multiplier: grad q^T lambda = -grad f
    Vec resid = scaled(pd.objectiveGradient, 1.0);
    for (std::size_t g = 0; g < l; ++g)
        resid = add(resid, scaled(constraint_at(pd, g).gradient, lambda[g]));
    if (norm(resid) > 1e-6 * (1.0 + norm(pd.objectiveGradient)))
        throw std::invalid_argument("lambda is not a Lagrange multiplier");

    std::vector<std::size_t> support = i_plus(pd, lambda, cfg.strictTol);
    std::vector<std::size_t> supportGlobals;
    for (std::size_t e = 0; e < l1; ++e) supportGlobals.push_back(e);
    for (std::size_t i : support) supportGlobals.push_back(l1 + i);

    for (std::size_t g : supportGlobals) {
        const Vec& grad = constraint_at(pd, g).gradient;
        if (std::abs(dot(grad, vn)) > 1e-8 * (1.0 + norm(grad)))
            throw std::invalid_argument(
                "direction is not orthogonal to the supported gradients");
    }
    {
        Mat HL = lagrangian_hessian(pd, lambda);
        Vec HLw(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) HLw[i] += HL(i, j) * w[j];
        if (dot(w, HLw) > 1e-6 * (1.0 + frobenius_norm(HL)))
            throw std::invalid_argument(
                "w is not a nonpositive-curvature direction");
    }

    ActiveSet act;
    for (std::size_t e = 0; e < l1; ++e) act.equalities.push_back(e);
    for (std::size_t i = 0; i < pd.inequalities.size(); ++i)
        if (pd.inequalities[i].value >= -cfg.activeTol)
            act.inequalities.push_back(i);
    std::vector<std::size_t> dirActive = directionally_active(pd, act, vn);

    // dual vector: <grad q_g, z> = -<v, hess q_g v> on E u I+, and at most
    // that on the remaining directionally active constraints
    std::vector<std::size_t> slackRows;
    for (std::size_t i : dirActive)
        if (std::find(support.begin(), support.end(), i) == support.end())
            slackRows.push_back(i);
    const std::size_t rowCount = supportGlobals.size() + slackRows.size();
    const std::size_t cols = n + slackRows.size();
    Mat A(rowCount, cols, 0.0);
    Vec b(rowCount, 0.0);
    std::size_t row = 0;
    for (std::size_t g : supportGlobals) {
        const Vec& grad = constraint_at(pd, g).gradient;
        for (std::size_t j = 0; j < n; ++j) A(row, j) = grad[j];
        b[row] = -curvature(pd, g, vn);
        ++row;
    }
    std::size_t slack = n;
    for (std::size_t i : slackRows) {
        const Vec& grad = pd.inequalities[i].gradient;
        for (std::size_t j = 0; j < n; ++j) A(row, j) = grad[j];
        A(row, slack++) = 1.0;
        b[row] = -curvature(pd, l1 + i, vn);
        ++row;
    }
    std::vector<SignKind> signs(cols, SignKind::NonNeg);
    for (std::size_t j = 0; j < n; ++j) signs[j] = SignKind::Free;
    LPResult lp = solve_lp(Vec(cols, 0.0), SignedPolyhedron{A, b, signs},
                           false, cfg.lpPivotTol);
    if (lp.status != LPStatus::Optimal)
        throw std::invalid_argument(
            "dual system is infeasible: lambda is not a directional "
            "multiplier for v");
    Vec ztilde(lp.vertexSolution.begin(), lp.vertexSolution.begin() + n);

    PerturbationResult out;
    out.v = vn;
    double alpha = std::max(0.0, -dot(ztilde, vn)) + 1.0;
    out.z = add(ztilde, scaled(vn, alpha));
    double C = dot(out.z, vn);
    out.r = 1.0 / (4.0 * C);

    for (std::size_t i : dirActive) {
        double val = dot(pd.inequalities[i].gradient, out.z) +
                     curvature(pd, l1 + i, vn);
        double sc = 1e-9 * (1.0 + std::abs(curvature(pd, l1 + i, vn)) +
                            norm(pd.inequalities[i].gradient) * norm(out.z));
        if (std::abs(val) <= sc) out.iHat.push_back(i);
    }

    // theta(x): solves theta + C/2 theta^2 = <x - xbar, v> away from the
    // bending region; the relu3 term keeps the square root positive globally
    ExprPtr inner = make_const(1.0);
    {
        ExprPtr dotXV = nullptr;
        for (std::size_t j = 0; j < n; ++j) {
            if (vn[j] == 0.0) continue;
            ExprPtr dx = make_sub(make_var(j), make_const(pd.x[j]));
            ExprPtr term = make_mul(make_const(2.0 * C * vn[j]), dx);
            dotXV = dotXV ? make_add(dotXV, term) : term;
        }
        if (dotXV) inner = make_add(inner, dotXV);
        ExprPtr dist2 = nullptr;
        for (std::size_t j = 0; j < n; ++j) {
            ExprPtr dx = make_sub(make_var(j), make_const(pd.x[j]));
            ExprPtr sq = make_pow(dx, 2);
            dist2 = dist2 ? make_add(dist2, sq) : sq;
        }
        ExprPtr bend = make_relu3(make_sub(make_sqrt(dist2), make_const(out.r)));
        inner = make_add(inner,
                         make_mul(make_const(64.0 * C * C * C), bend));
    }
    ExprPtr theta = make_div(
        make_add(make_const(-1.0), make_sqrt(inner)), make_const(C));
    ExprPtr theta2 = make_pow(theta, 2);

    std::vector<ExprPtr> path(n);
    for (std::size_t j = 0; j < n; ++j) {
        ExprPtr p = make_const(pd.x[j]);
        if (vn[j] != 0.0) p = make_add(p, make_mul(make_const(vn[j]), theta));
        if (out.z[j] != 0.0)
            p = make_add(p, make_mul(make_const(0.5 * out.z[j]), theta2));
        path[j] = folded(p);
    }

    ExprPtr dist4 = nullptr;
    {
        ExprPtr dist2 = nullptr;
        for (std::size_t j = 0; j < n; ++j) {
            ExprPtr dx = folded(make_sub(make_var(j), make_const(pd.x[j])));
            ExprPtr sq = make_pow(dx, 2);
            dist2 = dist2 ? make_add(dist2, sq) : sq;
        }
        dist4 = make_pow(dist2, 2);
    }

    out.perturbed = problem;
    auto expr_of = [&](std::size_t g) {
        return g < l1 ? problem.equalities[g]
                      : problem.inequalities[g - l1];
    };
    auto assign = [&](std::size_t g, const ExprPtr& e) {
        if (g < l1) out.perturbed.equalities[g] = e;
        else out.perturbed.inequalities[g - l1] = e;
    };
    for (std::size_t g : supportGlobals) {
        ExprPtr shifted = substitute(expr_of(g), path);
        assign(g, folded(make_sub(expr_of(g), shifted)));
    }
    for (std::size_t i : out.iHat) {
        if (std::find(support.begin(), support.end(), i) != support.end())
            continue;
        std::size_t g = l1 + i;
        ExprPtr shifted = substitute(expr_of(g), path);
        ExprPtr bent = make_sub(make_sub(expr_of(g), shifted), dist4);
        assign(g, folded(bent));
    }

    // the perturbed constraints must agree with the originals through first
    // order at the candidate point
    PointData check = eval_point(out.perturbed, pd.x);
    for (std::size_t g = 0; g < l; ++g) {
        const ConstraintData& a = constraint_at(pd, g);
        const ConstraintData& bb = constraint_at(check, g);
        if (std::abs(a.value - bb.value) > 1e-8 ||
            norm(sub(a.gradient, bb.gradient)) > 1e-8 * (1.0 + norm(a.gradient)))
            throw std::logic_error("perturbation self-check failed");
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::TILT_STABLE_CERTIFIED: return "TILT_STABLE_CERTIFIED";
        case Verdict::SUFFICIENT_ONLY: return "SUFFICIENT_ONLY";
        case Verdict::NOT_TILT_STABLE_CERTIFIED:
            return "NOT_TILT_STABLE_CERTIFIED";
        case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

StabilityAnalysis analyze(const ProblemSpec& problem,
                          const AnalysisConfig& cfg) {
    StabilityAnalysis a;
    a.problem = problem;
    a.point = eval_point(problem, problem.point);
    const PointData& pd = a.point;

    a.feasibilityResidual = violation_measure(pd);
    a.feasible = true;
    for (const auto& c : pd.equalities)
        if (std::abs(c.value) > cfg.feasTol) a.feasible = false;
    for (const auto& c : pd.inequalities)
        if (c.value > cfg.feasTol) a.feasible = false;
    if (!a.feasible) {
        a.verdict = Verdict::INCONCLUSIVE;
        a.verdictReason = "candidate point is infeasible";
        return a;
    }

    a.active = active_set(pd, cfg.activeTol);
    Vec xstar = scaled(pd.objectiveGradient, -1.0);
    a.multipliers = multiplier_set(pd, xstar, a.active, cfg);
    a.stationarityResidual = a.multipliers.residual;
    a.stationary =
        a.multipliers.feasible &&
        a.multipliers.residual <=
            cfg.firstOrderTol * (1.0 + norm(pd.objectiveGradient));
    if (!a.stationary) {
        a.verdict = Verdict::INCONCLUSIVE;
        a.verdictReason = "no Lagrange multiplier certifies stationarity";
        return a;
    }

    a.supportUnion = i_plus_union(pd, a.multipliers, cfg);

    a.licq = check_licq(pd, a.active, cfg);
    a.mfcq = check_mfcq(pd, a.active, cfg);
    a.crcq = check_crcq_sampled(problem, pd, a.active, cfg.cqRadius,
                                cfg.cqSampleCount, cfg.subsetCap);
    a.mscq = check_mscq_sampled(problem, pd, cfg.cqRadius, cfg.cqSampleCount);
    a.bepp = check_bepp_sampled(problem, pd, cfg.cqRadius, cfg.cqSampleCount);
    ConstraintPartition fullPartition;
    for (std::size_t e : a.active.equalities)
        fullPartition.equalitiesNormalized.push_back(e);
    for (std::size_t i : a.active.inequalities)
        fullPartition.inequalitiesNormalized.push_back(i);
    a.soscms = check_soscms(pd, a.active, fullPartition, {}, cfg);

    a.cone = critical_cone(pd, xstar, a.multipliers, cfg);
    a.extremes = lambda_bar_E(pd, a.multipliers, a.cone, cfg);
    a.sufficiency = sufficient_condition(pd, a.extremes, std::nullopt, cfg);
    a.necessity =
        necessity_applicability(pd, a.multipliers, a.cone, a.extremes, cfg);
    a.characterization = crcq_characterization(pd, a.multipliers, a.crcq,
                                               a.cone, std::nullopt, cfg);

    if (a.characterization.applicable) {
        if (a.characterization.holds) {
            a.verdict = Verdict::TILT_STABLE_CERTIFIED;
            a.tiltBound = a.characterization.bound;
            a.boundExact = true;
            a.verdictReason =
                "constant-rank reduction is positive definite";
        } else {
            a.verdict = Verdict::NOT_TILT_STABLE_CERTIFIED;
            a.tiltBound = kInf;
            a.verdictReason =
                "constant-rank reduction has a nonpositive eigenvalue";
        }
        return a;
    }

    if (a.sufficiency.holds) {
        bool vacuousOk = !a.sufficiency.vacuous || a.cone.isZero();
        if (vacuousOk && (a.extremes.exact || a.necessity.applicable)) {
            a.verdict = Verdict::TILT_STABLE_CERTIFIED;
            a.tiltBound = a.sufficiency.bound;
            a.boundExact = a.extremes.exact;
            a.verdictReason =
                a.extremes.exact
                    ? "second-order condition verified over the exactly "
                      "enumerated multipliers"
                    : "second-order condition verified and every extreme "
                      "multiplier admits a necessity route";
        } else if (vacuousOk) {
            a.verdict = Verdict::SUFFICIENT_ONLY;
            a.tiltBound = a.sufficiency.bound;
            a.verdictReason =
                "second-order condition holds on sampled directions only";
        } else {
            a.verdict = Verdict::INCONCLUSIVE;
            a.verdictReason =
                "no extreme multipliers found though the critical cone is "
                "nontrivial";
        }
        return a;
    }

    // second-order condition fails at some extreme multiplier: certify
    // instability when a covered (direction, multiplier) pair shows
    // nonpositive curvature along its own direction
    for (const auto& rec : a.necessity.directions) {
        for (const auto& per : rec.lambdas) {
            if (per.covered && per.vQuadratic <= cfg.strictTol) {
                a.verdict = Verdict::NOT_TILT_STABLE_CERTIFIED;
                a.tiltBound = kInf;
                a.verdictReason =
                    "a verified necessity route exposes nonpositive "
                    "curvature along a critical direction";
                return a;
            }
        }
    }
    a.verdict = Verdict::INCONCLUSIVE;
    a.verdictReason =
        "second-order condition fails but no necessity route certifies "
        "instability";
    return a;
}

}  // namespace tilt
