// Acceptance gate: one test case per shipped criterion, each printing a
// single PASS/FAIL line with its runtime.  Every numeric claim is asserted
// at its stated tolerance; runtime budgets are asserted too.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>
#include <tilt/corpus.hpp>
#include <tilt/oracle.hpp>
#include <tilt/report.hpp>
#include <tilt/stability.hpp>

using namespace tilt;
using Json = nlohmann::json;

namespace {

double now_s() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

ProblemSpec corpus_spec(const char* name,
                        const std::map<std::string, double>& params = {}) {
    const CorpusEntry* e = corpus_find(name);
    REQUIRE(e != nullptr);
    return parse_problem(e->text, params);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool vec_close(const Vec& a, const Vec& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

bool contains_vec(const std::vector<Vec>& pool, const Vec& target,
                  double tol) {
    for (const Vec& v : pool)
        if (vec_close(v, target, tol)) return true;
    return false;
}

bool parallel_unit(const Vec& v, const Vec& axis, double tol) {
    double n = norm(v);
    if (n < 1e-12) return false;
    Vec plus = axis, minus = scaled(axis, -1.0);
    Vec u = scaled(v, 1.0 / n);
    return vec_close(u, plus, tol) || vec_close(u, minus, tol);
}

// conjunction tracker so each criterion can print one PASS/FAIL line while
// every sub-fact still registers with the framework
struct Gate {
    bool ok = true;
    void operator()(bool condition) {
        CHECK(condition);
        ok = ok && condition;
    }
};

void report_line(int n, const char* label, const Gate& g, double seconds,
                 double budget) {
    CHECK(seconds < budget);
    std::printf("[criterion %d] %s  %s  (%.2fs, budget %.0fs)\n", n,
                (g.ok && seconds < budget) ? "PASS" : "FAIL", label, seconds,
                budget);
    std::fflush(stdout);
}

}  // namespace

TEST_CASE("criterion 1: degenerate corner certifies with bound zero") {
    double t0 = now_s();
    Gate g;
    StabilityAnalysis a = analyze(corpus_spec("ex81"));

    const std::vector<Vec>& verts = a.multipliers.generators.vertices;
    g(verts.size() == 2);
    g(contains_vec(verts, {0.0, 0.25, 0.375, 0.375}, 1e-9));
    g(contains_vec(verts, {0.375, 0.625, 0.0, 0.0}, 1e-9));
    g(a.cone.isZero());
    g(a.extremes.lambdas.empty());
    g(a.extremes.exact);
    g(a.verdict == Verdict::TILT_STABLE_CERTIFIED);
    g(a.tiltBound == 0.0);

    report_line(1, "two exact multiplier vertices, trivial cone, bound 0", g,
                now_s() - t0, 1.0);
}

TEST_CASE("criterion 2: parameter sweep matches the closed-form bound") {
    double t0 = now_s();
    Gate g;
    const double values[] = {0.5, 1.01, 2.0, 5.0};
    for (double aParam : values)
        for (double bParam : values) {
            ProblemSpec p =
                corpus_spec("ex82", {{"a", aParam}, {"b", bParam}});
            StabilityAnalysis an = analyze(p);
            bool expectStable = aParam > 1.0 && bParam > 1.0;
            bool certified = an.verdict == Verdict::TILT_STABLE_CERTIFIED;
            g(certified == expectStable);
            if (expectStable) {
                double want = 1.0 / std::min(aParam - 1.0, bParam - 1.0);
                g(std::abs(an.tiltBound - want) <= 1e-6 * want);
            }
        }
    report_line(2, "stable iff a>1 and b>1, bound 1/min(a-1,b-1) at 1e-6 rel",
                g, now_s() - t0, 5.0);
}

TEST_CASE("criterion 3: qualification suite on the parabolic sandwich") {
    double t0 = now_s();
    Gate g;
    ProblemSpec p = corpus_spec("ex82");
    StabilityAnalysis a = analyze(p);

    // positive-linear-independence failure carries a certified witness:
    // nonnegative on the active inequalities, l1-normalized, and it
    // annihilates the stacked gradients
    g(!a.mfcq.holds);
    const Vec& w = a.mfcq.failureWitness;
    const std::size_t nEq = p.equalities.size();
    g(w.size() == nEq + p.inequalities.size());
    if (w.size() == nEq + p.inequalities.size()) {
        double l1norm = 0.0;
        Vec combo(p.dimension, 0.0);
        for (std::size_t e = 0; e < nEq; ++e) {
            l1norm += std::abs(w[e]);
            const Vec& ge = a.point.equalities[e].gradient;
            for (std::size_t j = 0; j < p.dimension; ++j)
                combo[j] += w[e] * ge[j];
        }
        for (std::size_t i = 0; i + nEq < w.size(); ++i) {
            g(w[nEq + i] >= -1e-12);
            l1norm += std::abs(w[nEq + i]);
            const Vec& gi = a.point.inequalities[i].gradient;
            for (std::size_t j = 0; j < p.dimension; ++j)
                combo[j] += w[nEq + i] * gi[j];
        }
        g(close(l1norm, 1.0, 1e-9));
        g(norm(combo) <= 1e-8);
    }
    g(a.crcq.status == SampledStatus::FailsWithWitness);
    g(a.soscms.status == SoscmsStatus::Holds);

    report_line(3, "qualification failures carry certified witnesses", g,
                now_s() - t0, 2.0);
}

TEST_CASE("criterion 4: flat direction blocks every route but the probe") {
    double t0 = now_s();
    Gate g;
    ProblemSpec p = corpus_spec("ex83");
    StabilityAnalysis a = analyze(p);

    // sufficiency fails at multiplier (0,1) with a flat reduced direction
    // along the third axis
    g(!a.sufficiency.holds);
    bool found = false;
    for (const ReducedHessianRecord& r : a.sufficiency.records) {
        if (!vec_close(r.lambda, {0.0, 1.0}, 1e-9)) continue;
        found = true;
        g(close(r.minEigenvalue, 0.0, 1e-9));
        g(parallel_unit(r.eigenvector, {0.0, 0.0, 1.0}, 1e-6));
    }
    g(found);

    // at direction v = (0,1,0): the multiplier face is degenerate and no
    // directionally active subsystem is 2-regular
    Vec v = {0.0, 1.0, 0.0};
    DirectionalMultipliers dm =
        directional_multipliers(a.point, a.multipliers, v);
    g(!nondegenerate_in_direction(dm));
    DirectionalIndexSets xi = xi_and_maximal_J(a.point, a.active, v);
    g(!xi.maximal.empty());
    for (const std::vector<std::size_t>& jhat : xi.maximal)
        g(!two_regularity(a.point, jhat, v));
    g(!a.necessity.applicable);
    g(a.verdict == Verdict::INCONCLUSIVE);

    // the numerical probe still certifies Lipschitz single-valuedness
    TiltProbeReport probe = tilt_probe(p, p.point);
    g(probe.stableEvidence);
    g(probe.lipschitzEstimate >= 0.7);
    g(probe.lipschitzEstimate <= 1.5);

    report_line(4, "inconclusive analysis, stable probe, modulus near 1", g,
                now_s() - t0, 10.0);
}

TEST_CASE("criterion 5: probe exhibits the two-cluster instability") {
    double t0 = now_s();
    Gate g;
    ProblemSpec p = corpus_spec("ex84");

    // a tilt of the stated form splits the argmin into clusters at the
    // segment endpoints
    double u = 0.025;
    TiltedSolve s = solve_tilted(p, p.point, {0.0, u, 0.0});
    g(u >= 0.01 && u <= 0.1);
    g(s.multiValued);
    g(s.minimizers.size() >= 2);
    g(s.separation >= 1.5 * u * u);

    // and the blind sweep finds a witness of the same shape on its own
    TiltProbeReport probe = tilt_probe(p, p.point);
    g(probe.unstableWitness);
    g(probe.witnessClusters.size() == 2);
    if (probe.witnessTilt.size() == 3) {
        double wu = std::abs(probe.witnessTilt[1]);
        g(probe.witnessTilt[2] == 0.0);
        g(wu >= 0.01 && wu <= 0.1);
        g(probe.witnessSeparation >= 1.5 * wu * wu);
    } else {
        g(false);
    }

    report_line(5, "two minimizer clusters split by at least 1.5u^2", g,
                now_s() - t0, 10.0);
}

TEST_CASE("criterion 6: lifted corner separates the two second-order tests") {
    double t0 = now_s();
    Gate g;
    ProblemSpec p = corpus_spec("ex82r");
    AnalysisConfig cfg;
    StabilityAnalysis a = analyze(p, cfg);

    // one rendered report carries both facts
    Json doc = Json::parse(render_json(a, cfg));

    g(doc["multipliers"]["supportUnion"] == Json::array({1, 2, 3, 4}));

    const auto& ch = doc["secondOrder"]["constantRankCharacterization"];
    g(ch["applicable"] == true);
    g(ch["holds"] == true);
    g(ch["subspaceDimension"] == 1);
    g(close(ch["minEigenvalue"].get<double>(), 1.0, 1e-9));
    // the reduced subspace is the lifted axis
    g(a.characterization.subspaceBasis.cols() == 1);
    g(parallel_unit(a.characterization.subspaceBasis.col(0),
                    {0.0, 0.0, 0.0, 1.0}, 1e-9));

    // while the per-multiplier test fails at this vertex with a flat
    // direction along the second axis
    bool found = false;
    for (const auto& rec : doc["secondOrder"]["sufficiency"]["records"]) {
        Vec lambda = rec["lambda"].get<Vec>();
        if (!vec_close(lambda, {0.375, 0.625, 0.0, 0.0}, 1e-9)) continue;
        found = true;
        g(close(rec["minEigenvalue"].get<double>(), 0.0, 1e-9));
        Vec w = rec["eigenvector"].get<Vec>();
        g(parallel_unit(w, {0.0, 1.0, 0.0, 0.0}, 1e-6));
    }
    g(found);
    g(doc["verdict"]["verdict"] == "TILT_STABLE_CERTIFIED");

    report_line(6, "constant-rank reduction holds where per-multiplier fails",
                g, now_s() - t0, 2.0);
}

TEST_CASE("criterion 7: emitted perturbation flips the probe verdict") {
    double t0 = now_s();
    Gate g;

    const char* bin = std::getenv("TILTCHECK_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "TILTCHECK_BIN must point at the tool");

    char tmpl[] = "/tmp/tiltcheck_accept_XXXXXX";
    char* dir = mkdtemp(tmpl);
    REQUIRE(dir != nullptr);
    std::string problemFile = std::string(dir) + "/ex83.nlp";
    std::string bentFile = std::string(dir) + "/ex83.bent.nlp";
    {
        std::ofstream out(problemFile);
        out << corpus_find("ex83")->text;
    }

    std::string cmd = std::string(bin) + " perturb " + problemFile +
                      " --out " + bentFile + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
        out.append(buf, n);
    int rc = pclose(pipe);
    g(WIFEXITED(rc) && WEXITSTATUS(rc) == 0);
    g(out.find("PASS") != std::string::npos);

    // independent derivative check: the emitted constraints agree with the
    // originals at the candidate point through second order
    ProblemSpec original = corpus_spec("ex83");
    std::ifstream in(bentFile);
    std::ostringstream ss;
    ss << in.rdbuf();
    ProblemSpec bent = parse_problem(ss.str());
    g(bent.inequalities.size() == original.inequalities.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < original.inequalities.size(); ++k) {
        Taylor2 tb = eval_taylor(original.inequalities[k], original.point);
        Taylor2 ta = eval_taylor(bent.inequalities[k], original.point);
        worst = std::max(worst, std::abs(tb.value - ta.value));
        for (std::size_t i = 0; i < original.dimension; ++i) {
            worst = std::max(worst,
                             std::abs(tb.gradient[i] - ta.gradient[i]));
            for (std::size_t j = 0; j < original.dimension; ++j)
                worst = std::max(worst, std::abs(tb.hessian(i, j) -
                                                 ta.hessian(i, j)));
        }
    }
    g(worst <= 1e-8);

    // the bent problem genuinely loses single-valuedness
    TiltProbeReport probe = tilt_probe(bent, original.point);
    g(probe.unstableWitness);

    report_line(7, "second-order-matching bend produces an unstable witness",
                g, now_s() - t0, 15.0);
}

// --------------------------------------------------------------------------
// criterion 8: property suites (five parts sharing one 30s budget)

namespace {

double g_c8_total = 0.0;

// random smooth expressions staying in-domain on [-0.5, 0.5]^n
ExprPtr random_expr(std::mt19937& rng, std::size_t n, int depth) {
    std::uniform_real_distribution<double> uc(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
    switch (pick(rng)) {
        case 0: return make_const(uc(rng));
        case 1: {
            std::uniform_int_distribution<std::size_t> uv(0, n - 1);
            return make_var(uv(rng));
        }
        case 2:
            return make_add(random_expr(rng, n, depth - 1),
                            random_expr(rng, n, depth - 1));
        case 3:
            return make_sub(random_expr(rng, n, depth - 1),
                            random_expr(rng, n, depth - 1));
        case 4:
            return make_mul(random_expr(rng, n, depth - 1),
                            random_expr(rng, n, depth - 1));
        case 5:
            return make_neg(random_expr(rng, n, depth - 1));
        case 6: {
            std::uniform_int_distribution<int> ue(2, 3);
            return make_pow(random_expr(rng, n, depth - 1), ue(rng));
        }
        case 7: {
            // sqrt(2 + x_i^2 + ...) stays strictly positive
            std::uniform_int_distribution<std::size_t> uv(0, n - 1);
            return make_sqrt(make_add(
                make_const(2.0), make_pow(make_var(uv(rng)), 2)));
        }
        default: {
            // guarded quotient: denominator bounded away from zero
            std::uniform_int_distribution<std::size_t> uv(0, n - 1);
            return make_div(
                random_expr(rng, n, depth - 1),
                make_add(make_const(3.0), make_var(uv(rng))));
        }
    }
}

Vec random_point(std::mt19937& rng, std::size_t n) {
    std::uniform_real_distribution<double> up(-0.5, 0.5);
    Vec x(n);
    for (double& xi : x) xi = up(rng);
    return x;
}

}  // namespace

TEST_CASE("criterion 8a: derivatives agree with finite differences") {
    double t0 = now_s();
    Gate g;
    std::mt19937 rng(20240816);
    const std::size_t n = 3;
    for (int trial = 0; trial < 200; ++trial) {
        ExprPtr e = random_expr(rng, n, 3);
        Vec x = random_point(rng, n);
        Taylor2 t = eval_taylor(e, x);

        const double h = 1e-5;
        bool gradOk = true, hessOk = true;
        for (std::size_t i = 0; i < n; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (eval_value(e, xp) - eval_value(e, xm)) / (2.0 * h);
            if (std::abs(fd - t.gradient[i]) >
                1e-6 * (1.0 + std::abs(t.gradient[i])))
                gradOk = false;
            Taylor1 gp = eval_taylor1(e, xp);
            Taylor1 gm = eval_taylor1(e, xm);
            for (std::size_t j = 0; j < n; ++j) {
                double fdh = (gp.gradient[j] - gm.gradient[j]) / (2.0 * h);
                if (std::abs(fdh - t.hessian(i, j)) >
                    1e-5 * (1.0 + std::abs(t.hessian(i, j))))
                    hessOk = false;
            }
        }
        g(gradOk);
        g(hessOk);
        if (!gradOk || !hessOk) {
            CAPTURE(trial);
            CAPTURE(print_expression(e));
            break;
        }
    }
    g_c8_total += now_s() - t0;
    report_line(8, "a: 200 random expressions match finite differences", g,
                now_s() - t0, 30.0);
}

TEST_CASE("criterion 8b: simplex optimum equals the vertex-scan optimum") {
    double t0 = now_s();
    Gate g;
    std::mt19937 rng(7);
    for (const CorpusEntry& entry : corpus()) {
        ProblemSpec p = parse_problem(entry.text);
        PointData pd = eval_point(p, p.point);
        ActiveSet act = active_set(pd, 1e-8);
        Vec xstar(p.dimension, 0.0);
        for (std::size_t i = 0; i < p.dimension; ++i)
            xstar[i] = -pd.objectiveGradient[i];
        MultiplierSet ms = multiplier_set(pd, xstar, act);
        if (!ms.feasible) continue;
        const std::size_t d = ms.polyhedron.signs.size();
        std::uniform_real_distribution<double> uo(-1.0, 1.0);
        for (int k = 0; k < 10; ++k) {
            Vec c(d);
            for (double& ci : c) ci = uo(rng);
            LPResult lp = solve_lp(c, ms.polyhedron, /*maximize=*/true);
            bool rayImproves = false;
            for (const Vec& r : ms.generators.rays)
                if (dot(c, r) > 1e-9) rayImproves = true;
            for (const Vec& l : ms.generators.lineality)
                if (std::abs(dot(c, l)) > 1e-9) rayImproves = true;
            if (lp.status == LPStatus::Unbounded) {
                g(rayImproves);
                continue;
            }
            g(lp.status == LPStatus::Optimal);
            g(!rayImproves);
            double best = -1e300;
            for (const Vec& v : ms.generators.vertices)
                best = std::max(best, dot(c, v));
            g(close(lp.optimalValue, best,
                    1e-9 * (1.0 + std::abs(best))));
        }
    }
    g_c8_total += now_s() - t0;
    report_line(8, "b: LP optimum equals vertex enumeration on multipliers",
                g, now_s() - t0, 30.0);
}

TEST_CASE("criterion 8c: generator decomposition reconstructs membership") {
    double t0 = now_s();
    Gate g;
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::size_t> ud(3, 5);
    std::uniform_int_distribution<std::size_t> um(1, 2);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    std::uniform_real_distribution<double> ux(0.1, 1.0);

    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = ud(rng), m = um(rng);
        SignedPolyhedron P;
        P.Aeq = Mat(m, d, 0.0);
        P.signs.assign(d, SignKind::NonNeg);
        // a couple of free coordinates keep the lineality path exercised
        if (d >= 4) P.signs[d - 1] = SignKind::Free;
        Vec x0(d);
        for (std::size_t j = 0; j < d; ++j)
            x0[j] = P.signs[j] == SignKind::Free ? ua(rng) : ux(rng);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) P.Aeq(i, j) = ua(rng);
        P.beq = P.Aeq * x0;  // x0 is feasible by construction

        VertexSet V = enumerate_vertices(P);

        auto feasible = [&](const Vec& y) {
            Vec r = P.Aeq * y;
            for (std::size_t i = 0; i < m; ++i)
                if (std::abs(r[i] - P.beq[i]) > 1e-8) return false;
            for (std::size_t j = 0; j < d; ++j) {
                if (P.signs[j] == SignKind::NonNeg && y[j] < -1e-8)
                    return false;
                if (P.signs[j] == SignKind::Zero && std::abs(y[j]) > 1e-8)
                    return false;
            }
            return true;
        };

        // soundness: every generator combination stays inside
        for (const Vec& v : V.vertices) g(feasible(v));
        std::uniform_real_distribution<double> uw(0.0, 1.0);
        for (int s = 0; s < 5 && !V.vertices.empty(); ++s) {
            Vec y(d, 0.0);
            double total = 0.0;
            for (const Vec& v : V.vertices) {
                double w = uw(rng);
                total += w;
                for (std::size_t j = 0; j < d; ++j) y[j] += w * v[j];
            }
            for (std::size_t j = 0; j < d; ++j) y[j] /= total;
            for (const Vec& r : V.rays) {
                double w = uw(rng);
                for (std::size_t j = 0; j < d; ++j) y[j] += w * r[j];
            }
            for (const Vec& l : V.lineality) {
                double w = ua(rng);
                for (std::size_t j = 0; j < d; ++j) y[j] += w * l[j];
            }
            g(feasible(y));
        }

        // completeness: a known member decomposes over the generators
        // (weights w >= 0 summing to one, ray weights >= 0, line weights
        // free), found by LP feasibility
        const std::size_t nv = V.vertices.size(), nr = V.rays.size(),
                          nl = V.lineality.size();
        if (nv == 0) {
            g(false);
            continue;
        }
        SignedPolyhedron D;
        D.Aeq = Mat(d + 1, nv + nr + nl, 0.0);
        D.signs.assign(nv + nr + nl, SignKind::NonNeg);
        for (std::size_t k = 0; k < nl; ++k)
            D.signs[nv + nr + k] = SignKind::Free;
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t k = 0; k < nv; ++k)
                D.Aeq(j, k) = V.vertices[k][j];
            for (std::size_t k = 0; k < nr; ++k)
                D.Aeq(j, nv + k) = V.rays[k][j];
            for (std::size_t k = 0; k < nl; ++k)
                D.Aeq(j, nv + nr + k) = V.lineality[k][j];
        }
        for (std::size_t k = 0; k < nv; ++k) D.Aeq(d, k) = 1.0;
        D.beq = x0;
        D.beq.push_back(1.0);
        LPResult lp = solve_lp(Vec(nv + nr + nl, 0.0), D, true);
        g(lp.status == LPStatus::Optimal);
    }
    g_c8_total += now_s() - t0;
    report_line(8, "c: 20 random polyhedra round-trip through generators", g,
                now_s() - t0, 30.0);
}

TEST_CASE("criterion 8d: argmax faces ignore positive scaling") {
    double t0 = now_s();
    Gate g;
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> uw(0.0, 1.0);
    std::uniform_real_distribution<double> ul(-1.0, 1.0);
    std::uniform_real_distribution<double> us(0.3, 9.0);

    // directions fed to the face routine must be critical, so sample conic
    // combinations of each problem's cone generators
    struct Setting {
        PointData pd;
        MultiplierSet ms;
        VertexSet cone;
    };
    std::vector<Setting> settings;
    for (const CorpusEntry& entry : corpus()) {
        StabilityAnalysis a = analyze(parse_problem(entry.text));
        if (!a.stationary || a.cone.isZero()) continue;
        settings.push_back({a.point, a.multipliers, a.cone.generators});
    }
    REQUIRE(!settings.empty());

    int pairs = 0;
    std::size_t turn = 0;
    while (pairs < 50) {
        const Setting& s = settings[turn++ % settings.size()];
        Vec v(s.pd.x.size(), 0.0);
        for (const Vec& r : s.cone.rays) {
            double w = uw(rng);
            for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * r[j];
        }
        for (const Vec& l : s.cone.lineality) {
            double w = ul(rng);
            for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * l[j];
        }
        if (norm(v) < 1e-6) continue;
        double alpha = us(rng);

        DirectionalMultipliers f1 = directional_multipliers(s.pd, s.ms, v);
        DirectionalMultipliers f2 =
            directional_multipliers(s.pd, s.ms, scaled(v, alpha));
        g(f1.unboundedObjective == f2.unboundedObjective);
        g(f1.face.lpStatus == f2.face.lpStatus);
        if (f1.face.lpStatus == LPStatus::Optimal) {
            g(f1.face.face.vertices.size() == f2.face.face.vertices.size());
            for (const Vec& vert : f1.face.face.vertices)
                g(contains_vec(f2.face.face.vertices, vert, 1e-9));
        }
        ++pairs;
    }
    g_c8_total += now_s() - t0;
    report_line(8, "d: 50 scaled direction pairs share their argmax face", g,
                now_s() - t0, 30.0);
}

TEST_CASE("criterion 8e: reduced form is multiplier-independent under "
          "constant rank") {
    double t0 = now_s();
    Gate g;
    bool exercised = false;
    for (const CorpusEntry& entry : corpus()) {
        ProblemSpec p = parse_problem(entry.text);
        StabilityAnalysis a = analyze(p);
        if (!a.characterization.applicable) continue;
        exercised = true;
        g(a.characterization.formConstant);
        g(a.characterization.formDeviation <= 1e-7);
    }
    g(exercised);
    g_c8_total += now_s() - t0;
    CHECK(g_c8_total < 30.0);
    report_line(8, "e: reduced quadratic form constant across multipliers",
                g, now_s() - t0, 30.0);
    std::printf("[criterion 8] property suites total %.2fs of 30s shared budget\n",
                g_c8_total);
}
