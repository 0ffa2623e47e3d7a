#include <tilt/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include <tilt/linalg.hpp>

namespace tilt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                   31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
constexpr std::size_t kPrimeCount = sizeof(kPrimes) / sizeof(kPrimes[0]);

double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    for (std::size_t i = index + 1; i > 0; i /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
    }
    return r;
}

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

struct Probe {
    const ProblemSpec& p;
    Vec xbar;
    double gamma = 0.0;
};

Vec project_ball(const Probe& c, Vec x) {
    Vec d = sub(x, c.xbar);
    double nd = norm(d);
    if (nd <= c.gamma) return x;
    return add(c.xbar, scaled(d, c.gamma / nd));
}

// tilted objective f(x) - <tilt, x>
double tilted_value(const Probe& c, const Vec& tilt, const Vec& x, Vec* grad) {
    Taylor1 t = eval_taylor1(c.p.objective, x);
    if (grad) {
        *grad = t.gradient;
        for (std::size_t i = 0; i < x.size(); ++i) (*grad)[i] -= tilt[i];
    }
    return t.value - dot(tilt, x);
}

// quadratic penalty: sum q_E^2 + sum max(q_I, 0)^2, plus the worst violation
double penalty_value(const Probe& c, const Vec& x, Vec* grad, double* viol) {
    double pen = 0.0, worst = 0.0;
    if (grad) grad->assign(x.size(), 0.0);
    for (const ExprPtr& e : c.p.equalities) {
        Taylor1 t = eval_taylor1(e, x);
        pen += t.value * t.value;
        worst = std::max(worst, std::abs(t.value));
        if (grad)
            for (std::size_t i = 0; i < x.size(); ++i)
                (*grad)[i] += 2.0 * t.value * t.gradient[i];
    }
    for (const ExprPtr& e : c.p.inequalities) {
        Taylor1 t = eval_taylor1(e, x);
        if (t.value <= 0.0) continue;
        pen += t.value * t.value;
        worst = std::max(worst, t.value);
        if (grad)
            for (std::size_t i = 0; i < x.size(); ++i)
                (*grad)[i] += 2.0 * t.value * t.gradient[i];
    }
    if (viol) *viol = worst;
    return pen;
}

// projected-gradient descent with backtracking on f_t + rho * penalty
Vec descend(const Probe& c, const Vec& tilt, Vec x, double rho,
            std::size_t maxIter) {
    auto merit = [&](const Vec& y, Vec* g) -> double {
        try {
            Vec go, gp;
            double v = tilted_value(c, tilt, y, g ? &go : nullptr);
            double pen = penalty_value(c, y, g ? &gp : nullptr, nullptr);
            if (g) *g = add(go, scaled(gp, rho));
            return v + rho * pen;
        } catch (const DomainError&) {
            return kInf;
        }
    };

    Vec g(x.size(), 0.0);
    double fx = merit(x, &g);
    if (!std::isfinite(fx)) return x;
    double step = 1.0 / (1.0 + std::sqrt(rho));
    for (std::size_t iter = 0; iter < maxIter; ++iter) {
        double gn = norm(g);
        if (gn <= 1e-13 * (1.0 + std::abs(fx))) break;
        bool accepted = false;
        for (std::size_t half = 0; half < 40; ++half) {
            Vec cand = project_ball(c, sub(x, scaled(g, step)));
            Vec moved = sub(x, cand);
            double mn2 = dot(moved, moved);
            if (mn2 <= 1e-26 * (1.0 + dot(x, x))) break;  // stalled
            double fc = merit(cand, nullptr);
            if (fc <= fx - 1e-4 / step * mn2) {
                x = cand;
                fx = merit(x, &g);
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return x;
}

// Newton iteration on the stationarity system of the active constraints;
// minimum-norm steps leave genuinely flat directions untouched
struct PolishOutcome {
    Vec x;
    bool ok = false;
};

PolishOutcome polish(const Probe& c, const Vec& tilt, Vec x) {
    PolishOutcome out;
    out.x = x;
    const std::size_t n = x.size();
    const std::size_t l1 = c.p.equalities.size();

    std::vector<std::size_t> activeIneq;
    try {
        PointData pd = eval_point(c.p, x);
        for (std::size_t i = 0; i < pd.inequalities.size(); ++i)
            if (pd.inequalities[i].value > -1e-6) activeIneq.push_back(i);
    } catch (const DomainError&) {
        return out;
    }
    const std::size_t m = l1 + activeIneq.size();

    // initial multipliers by least squares on the gradient rows
    Vec lambda(m, 0.0);
    auto assemble = [&](const PointData& pd, Vec& objGrad,
                        std::vector<const ConstraintData*>& rows) {
        Taylor1 t = eval_taylor1(c.p.objective, x);
        objGrad = t.gradient;
        for (std::size_t i = 0; i < n; ++i) objGrad[i] -= tilt[i];
        rows.clear();
        for (std::size_t e = 0; e < l1; ++e) rows.push_back(&pd.equalities[e]);
        for (std::size_t i : activeIneq) rows.push_back(&pd.inequalities[i]);
    };

    double residualNorm = kInf;
    for (std::size_t iter = 0; iter < 25; ++iter) {
        PointData pd;
        try {
            pd = eval_point(c.p, x);
        } catch (const DomainError&) {
            return out;
        }
        Vec objGrad;
        std::vector<const ConstraintData*> rows;
        assemble(pd, objGrad, rows);

        if (iter == 0 && m > 0) {
            Mat gt(n, m, 0.0);
            for (std::size_t k = 0; k < m; ++k)
                for (std::size_t i = 0; i < n; ++i)
                    gt(i, k) = rows[k]->gradient[i];
            lambda = solve_least_squares(gt, scaled(objGrad, -1.0)).solution;
        }

        // residual of the stationarity system
        Vec F(n + m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            F[i] = objGrad[i];
            for (std::size_t k = 0; k < m; ++k)
                F[i] += lambda[k] * rows[k]->gradient[i];
        }
        for (std::size_t k = 0; k < m; ++k) F[n + k] = rows[k]->value;
        residualNorm = norm(F);
        if (residualNorm <= 1e-13) break;

        Mat J(n + m, n + m, 0.0);
        Taylor2 obj = eval_taylor(c.p.objective, x);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double h = obj.hessian(i, j);
                for (std::size_t k = 0; k < m; ++k)
                    h += lambda[k] * rows[k]->hessian(i, j);
                J(i, j) = h;
            }
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < n; ++i) {
                J(i, n + k) = rows[k]->gradient[i];
                J(n + k, i) = rows[k]->gradient[i];
            }
        Vec dz = solve_least_squares(J, scaled(F, -1.0)).solution;
        double dn = norm(dz);
        if (!std::isfinite(dn) || dn > 1.0) break;  // diverging; keep input
        for (std::size_t i = 0; i < n; ++i) x[i] += dz[i];
        for (std::size_t k = 0; k < m; ++k) lambda[k] += dz[n + k];
        if (dn <= 1e-14) break;
    }

    if (residualNorm > 1e-9) return out;
    for (std::size_t k = l1; k < m; ++k)
        if (lambda[k] < -1e-9) return out;
    try {
        PointData pd = eval_point(c.p, x);
        for (std::size_t i = 0; i < pd.inequalities.size(); ++i)
            if (pd.inequalities[i].value > 1e-10) return out;
        for (std::size_t e = 0; e < l1; ++e)
            if (std::abs(pd.equalities[e].value) > 1e-10) return out;
    } catch (const DomainError&) {
        return out;
    }
    if (norm(sub(x, c.xbar)) > c.gamma * (1.0 + 1e-9)) return out;
    out.x = x;
    out.ok = true;
    return out;
}

// minimum-norm stationarity residual over the active gradient rows
double stationarity_residual(const Probe& c, const Vec& tilt, const Vec& x) {
    PointData pd;
    try {
        pd = eval_point(c.p, x);
    } catch (const DomainError&) {
        return kInf;
    }
    const std::size_t n = x.size();
    Vec objGrad;
    Taylor1 t = eval_taylor1(c.p.objective, x);
    objGrad = t.gradient;
    for (std::size_t i = 0; i < n; ++i) objGrad[i] -= tilt[i];

    std::vector<const ConstraintData*> rows;
    for (const ConstraintData& e : pd.equalities) rows.push_back(&e);
    for (const ConstraintData& q : pd.inequalities)
        if (q.value > -1e-7) rows.push_back(&q);
    if (rows.empty()) return norm(objGrad);

    Mat gt(n, rows.size(), 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) gt(i, k) = rows[k]->gradient[i];
    return solve_least_squares(gt, scaled(objGrad, -1.0)).residualNorm;
}

double feasibility_violation(const Probe& c, const Vec& x) {
    double v = kInf;
    try {
        penalty_value(c, x, nullptr, &v);
    } catch (const DomainError&) {
    }
    return v;
}

}  // namespace

TiltedSolve solve_tilted(const ProblemSpec& problem, const Vec& xbar,
                         const Vec& tilt, const TiltProbeConfig& cfg) {
    if (xbar.size() != problem.dimension || tilt.size() != problem.dimension)
        throw std::invalid_argument("solve_tilted: dimension mismatch");
    Probe c{problem, xbar, cfg.gamma};
    TiltedSolve out;
    out.tilt = tilt;

    std::vector<Vec> startPoints;
    startPoints.push_back(xbar);
    for (const Vec& d : halton_ball(problem.dimension, cfg.starts))
        startPoints.push_back(add(xbar, scaled(d, cfg.gamma)));

    struct Candidate {
        Vec x;
        double value;
        double violation;
        double stationarity;
    };
    std::vector<Candidate> kept;

    const double ladder[] = {1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
    for (const Vec& start : startPoints) {
        Vec x = start;
        bool polished = false;
        for (double rho : ladder) {
            Vec next = descend(c, tilt, x, rho, 60);
            double moved = norm(sub(next, x));
            x = next;
            // once the penalty phase is past its crude stages, the Newton
            // polish usually closes the remaining gap in a few steps, so a
            // successful polish ends the ladder early
            if (rho >= 1e3) {
                PolishOutcome pol = polish(c, tilt, x);
                if (pol.ok) {
                    x = pol.x;
                    polished = true;
                    break;
                }
            }
            if (feasibility_violation(c, x) <= 1e-10 && moved <= 1e-11) break;
        }
        if (!polished) {
            PolishOutcome pol = polish(c, tilt, x);
            if (pol.ok) x = pol.x;
        }

        double viol = feasibility_violation(c, x);
        double stat = stationarity_residual(c, tilt, x);
        if (viol > cfg.feasTol) continue;
        if (stat > cfg.stationarityTol) continue;
        if (norm(sub(x, xbar)) > cfg.gamma * (1.0 + 1e-9)) continue;
        double value;
        try {
            value = tilted_value(c, tilt, x, nullptr);
        } catch (const DomainError&) {
            continue;
        }
        kept.push_back({x, value, viol, stat});
    }

    if (kept.empty()) return out;

    double best = kInf;
    for (const Candidate& k : kept) best = std::min(best, k.value);
    out.bestValue = best;
    double tieTol =
        cfg.tieTol > 0.0 ? cfg.tieTol : 1e-8 * (1.0 + std::abs(best));
    double clusterTol = cfg.effectiveClusterTol();

    for (const Candidate& k : kept) {
        if (k.value > best + tieTol) continue;
        bool absorbed = false;
        for (const Vec& rep : out.minimizers)
            if (norm(sub(rep, k.x)) <= clusterTol) {
                absorbed = true;
                break;
            }
        if (!absorbed) {
            out.minimizers.push_back(k.x);
            out.values.push_back(k.value);
            out.residual = std::max(out.residual, k.violation);
            out.stationarity = std::max(out.stationarity, k.stationarity);
        }
    }

    for (std::size_t i = 0; i < out.minimizers.size(); ++i)
        for (std::size_t j = i + 1; j < out.minimizers.size(); ++j)
            out.separation = std::max(
                out.separation, norm(sub(out.minimizers[i], out.minimizers[j])));
    out.multiValued =
        out.minimizers.size() >= 2 && out.separation > 10.0 * clusterTol;
    return out;
}

TiltProbeReport tilt_probe(const ProblemSpec& problem, const Vec& xbar,
                           const TiltProbeConfig& cfg) {
    TiltProbeReport report;
    const std::size_t n = problem.dimension;
    const double delta = cfg.effectiveDelta();

    std::vector<Vec> tilts;
    double gridSize = std::pow(static_cast<double>(cfg.gridPerAxis),
                               static_cast<double>(n));
    if (cfg.gridPerAxis >= 2 && gridSize <= static_cast<double>(cfg.gridCap)) {
        // full lexicographic grid over the cube [-delta, delta]^n
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            Vec t(n);
            for (std::size_t j = 0; j < n; ++j)
                t[j] = delta * (2.0 * static_cast<double>(idx[j]) /
                                    static_cast<double>(cfg.gridPerAxis - 1) -
                                1.0);
            tilts.push_back(t);
            std::size_t j = 0;
            while (j < n && ++idx[j] == cfg.gridPerAxis) idx[j++] = 0;
            if (j == n) break;
        }
    } else {
        tilts.push_back(Vec(n, 0.0));
        for (const Vec& d : halton_ball(n, cfg.gridCap - 1))
            tilts.push_back(scaled(d, delta));
    }

    bool allSingle = true;
    for (const Vec& t : tilts) {
        TiltedSolve solve = solve_tilted(problem, xbar, t, cfg);
        // representatives closer than the instability threshold count as one
        // numerical solution; only a decided multiValued solve (or a failed
        // one) disqualifies the stability evidence
        if (solve.minimizers.empty() || solve.multiValued) allSingle = false;
        // witness preference: strongest separation, then (within a relative
        // whisker) the mildest tilt exhibiting it
        bool first = solve.multiValued && !report.unstableWitness;
        bool stronger =
            solve.multiValued &&
            solve.separation > report.witnessSeparation * (1.0 + 1e-9);
        bool milder = solve.multiValued && !first && !stronger &&
                      solve.separation >=
                          report.witnessSeparation * (1.0 - 1e-9) &&
                      norm(t) < norm(report.witnessTilt) - 1e-15;
        if (first || stronger || milder) {
            report.unstableWitness = true;
            report.witnessSeparation =
                std::max(report.witnessSeparation, solve.separation);
            report.witnessTilt = t;
            // the two most separated representatives
            std::size_t bi = 0, bj = 1;
            double bd = -1.0;
            for (std::size_t i = 0; i < solve.minimizers.size(); ++i)
                for (std::size_t j = i + 1; j < solve.minimizers.size(); ++j) {
                    double d =
                        norm(sub(solve.minimizers[i], solve.minimizers[j]));
                    if (d > bd) {
                        bd = d;
                        bi = i;
                        bj = j;
                    }
                }
            report.witnessClusters = {solve.minimizers[bi],
                                      solve.minimizers[bj]};
        }
        report.maxResidual = std::max(report.maxResidual, solve.residual);
        report.maxStationarity =
            std::max(report.maxStationarity, solve.stationarity);
        report.solves.push_back(std::move(solve));
    }
    report.tiltCount = tilts.size();

    bool anyPair = false;
    for (std::size_t i = 0; i < report.solves.size(); ++i) {
        if (report.solves[i].minimizers.size() != 1) continue;
        for (std::size_t j = i + 1; j < report.solves.size(); ++j) {
            if (report.solves[j].minimizers.size() != 1) continue;
            double dv =
                norm(sub(report.solves[i].tilt, report.solves[j].tilt));
            if (dv < delta / 10.0) continue;
            double dm = norm(sub(report.solves[i].minimizers.front(),
                                 report.solves[j].minimizers.front()));
            report.lipschitzEstimate =
                std::max(report.lipschitzEstimate, dm / dv);
            anyPair = true;
        }
    }
    report.stableEvidence =
        allSingle && anyPair && !report.unstableWitness;
    return report;
}

}  // namespace tilt
