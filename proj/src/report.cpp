#include <tilt/report.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

namespace tilt {
namespace {

using Json = nlohmann::ordered_json;

// non-finite values (e.g. the trivial-subspace eigenvalue sentinel) render
// as null so every emitted number round-trips
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

Json vecs_json(const std::vector<Vec>& vs) {
    Json a = Json::array();
    for (const Vec& v : vs) a.push_back(vec_json(v));
    return a;
}

// constraint indices are reported 1-based per kind
Json indices1(const std::vector<std::size_t>& idx) {
    Json a = Json::array();
    for (std::size_t i : idx) a.push_back(i + 1);
    return a;
}

// split a list of global constraint indices (equalities first) into 1-based
// per-kind lists
Json split_rows(const std::vector<std::size_t>& rows, std::size_t l1) {
    Json eq = Json::array(), in = Json::array();
    for (std::size_t g : rows) {
        if (g < l1)
            eq.push_back(g + 1);
        else
            in.push_back(g - l1 + 1);
    }
    return Json{{"equalities", eq}, {"inequalities", in}};
}

const char* sampled_name(SampledStatus s) {
    switch (s) {
        case SampledStatus::HoldsSampled: return "holdsSampled";
        case SampledStatus::FailsWithWitness: return "failsWithWitness";
        default: return "inconclusive";
    }
}

const char* soscms_name(SoscmsStatus s) {
    switch (s) {
        case SoscmsStatus::Holds: return "holds";
        case SoscmsStatus::HoldsSampled: return "holdsSampled";
        case SoscmsStatus::FailsWithWitness: return "failsWithWitness";
        default: return "inconclusive";
    }
}

Json tool_section() {
    return Json{{"name", kToolName}, {"version", kToolVersion}};
}

Json problem_section(const ProblemSpec& p) {
    Json eq = Json::array();
    for (const ExprPtr& e : p.equalities) eq.push_back(print_expression(e));
    Json in = Json::array();
    for (const ExprPtr& e : p.inequalities) in.push_back(print_expression(e));
    Json params = Json::object();
    for (const auto& [k, v] : p.params) params[k] = num(v);
    return Json{{"dimension", p.dimension},
                {"objective", print_expression(p.objective)},
                {"equalities", eq},
                {"inequalities", in},
                {"point", vec_json(p.point)},
                {"params", params}};
}

Json config_section(const AnalysisConfig& c) {
    return Json{{"activeTol", num(c.activeTol)},
                {"feasTol", num(c.feasTol)},
                {"rankTol", num(c.rankTol)},
                {"strictTol", num(c.strictTol)},
                {"dedupeTol", num(c.dedupeTol)},
                {"lpPivotTol", num(c.lpPivotTol)},
                {"firstOrderTol", num(c.firstOrderTol)},
                {"cqRadius", num(c.cqRadius)},
                {"cqSampleCount", c.cqSampleCount},
                {"sphereSampleCount", c.sphereSampleCount},
                {"subsetCap", c.subsetCap},
                {"oracleGamma", num(c.oracleGamma)},
                {"oracleDelta", num(c.oracleDelta)},
                {"oracleGridPerAxis", c.oracleGridPerAxis},
                {"oracleStarts", c.oracleStarts},
                {"verbosity", c.verbosity}};
}

Json feasibility_section(const StabilityAnalysis& a) {
    return Json{{"feasible", a.feasible},
                {"residual", num(a.feasibilityResidual)}};
}

Json first_order_section(const StabilityAnalysis& a) {
    return Json{{"stationary", a.stationary},
                {"residual", num(a.stationarityResidual)},
                {"xstar", vec_json(a.multipliers.xstar)},
                {"activeEqualities", indices1(a.active.equalities)},
                {"activeInequalities", indices1(a.active.inequalities)}};
}

Json cqs_section(const StabilityAnalysis& a) {
    Json licq{{"holds", a.licq.holds},
              {"rank", a.licq.rank},
              {"activeRows", a.licq.rowCount}};
    Json mfcq{{"holds", a.mfcq.holds},
              {"equalityGradientsIndependent",
               a.mfcq.equalityGradientsIndependent},
              {"modulusEstimate", num(a.mfcq.modulusEstimate)},
              {"estimateCertified", a.mfcq.estimateCertified}};
    if (!a.mfcq.failureWitness.empty())
        mfcq["failureWitness"] = vec_json(a.mfcq.failureWitness);
    Json crcq{{"status", sampled_name(a.crcq.status)},
              {"radius", num(a.crcq.radius)},
              {"subsetsTruncated", a.crcq.subsetsTruncated}};
    if (a.crcq.status == SampledStatus::FailsWithWitness) {
        crcq["witnessSubset"] = indices1(a.crcq.witnessSubset);
        crcq["witnessPoint"] = vec_json(a.crcq.witnessPoint);
        crcq["rankAtPoint"] = a.crcq.rankAtPoint;
        crcq["rankAtCandidate"] = a.crcq.rankAtCandidate;
    }
    Json mscq{{"status", sampled_name(a.mscq.status)},
              {"kappaEstimate", num(a.mscq.kappaEstimate)},
              {"shellKappa", vec_json(a.mscq.shellKappa)},
              {"growthLimit", num(a.mscq.growthLimit)}};
    Json bepp{{"status", sampled_name(a.bepp.status)},
              {"estimate", num(a.bepp.estimate)},
              {"shellEstimate", vec_json(a.bepp.shellEstimate)},
              {"equalityGradientsIndependent",
               a.bepp.equalityGradientsIndependent},
              {"growthLimit", num(a.bepp.growthLimit)}};
    Json soscms{{"status", soscms_name(a.soscms.status)},
                {"exact", a.soscms.exact},
                {"note", a.soscms.note}};
    if (a.soscms.status == SoscmsStatus::FailsWithWitness) {
        soscms["witnessDirection"] = vec_json(a.soscms.witnessDirection);
        soscms["witnessMultiplier"] = vec_json(a.soscms.witnessMultiplier);
    }
    return Json{{"licq", licq},   {"mfcq", mfcq}, {"crcq", crcq},
                {"mscq", mscq},   {"bepp", bepp}, {"soscms", soscms}};
}

Json multipliers_section(const StabilityAnalysis& a) {
    Json support = Json::array();
    for (const auto& s : a.multipliers.vertexSupport)
        support.push_back(indices1(s));
    return Json{{"feasible", a.multipliers.feasible},
                {"residual", num(a.multipliers.residual)},
                {"vertices", vecs_json(a.multipliers.generators.vertices)},
                {"rays", vecs_json(a.multipliers.generators.rays)},
                {"lineality", vecs_json(a.multipliers.generators.lineality)},
                {"vertexStrictSupport", support},
                {"supportUnion", indices1(a.supportUnion)}};
}

Json cone_section(const StabilityAnalysis& a) {
    const std::size_t l1 = a.problem.equalities.size();
    return Json{{"dimension", a.cone.dimension},
                {"isZero", a.cone.isZero()},
                {"rays", vecs_json(a.cone.generators.rays)},
                {"lineality", vecs_json(a.cone.generators.lineality)},
                {"equalityRows", split_rows(a.cone.equalityRows, l1)},
                {"inequalityRows", split_rows(a.cone.inequalityRows, l1)}};
}

Json extremes_section(const StabilityAnalysis& a) {
    return Json{
        {"exact", a.extremes.exact},
        {"anyUnbounded", a.extremes.anyUnbounded},
        {"facesVertexFree", a.extremes.facesVertexFree},
        {"directionsUsed", a.extremes.directionsUsed.size()},
        {"multipliers", vecs_json(a.extremes.lambdas)},
        {"witnessDirections", vecs_json(a.extremes.witnessDirection)},
        {"method", a.extremes.exact
                       ? "exact (cone is trivial, a ray, or a line)"
                       : "sampled candidate directions (collection may be "
                         "incomplete)"}};
}

Json second_order_section(const StabilityAnalysis& a) {
    const std::size_t l1 = a.problem.equalities.size();
    Json records = Json::array();
    for (const ReducedHessianRecord& r : a.sufficiency.records) {
        Json rec{{"lambda", vec_json(r.lambda)},
                 {"support", split_rows(r.support, l1)},
                 {"subspaceDimension", r.reduced.rows()},
                 {"minEigenvalue", num(r.minEigenvalue)}};
        if (!r.eigenvector.empty())
            rec["eigenvector"] = vec_json(r.eigenvector);
        records.push_back(rec);
    }
    Json sufficiency{{"holds", a.sufficiency.holds},
                     {"vacuous", a.sufficiency.vacuous},
                     {"bound", num(a.sufficiency.bound)},
                     {"worstIndex", a.sufficiency.worstIndex},
                     {"records", records}};
    Json ch{{"applicable", a.characterization.applicable}};
    if (a.characterization.applicable) {
        ch["holds"] = a.characterization.holds;
        ch["bound"] = num(a.characterization.bound);
        ch["lambdaTilde"] = vec_json(a.characterization.lambdaTilde);
        ch["subspaceDimension"] = a.characterization.reduced.rows();
        ch["minEigenvalue"] = num(a.characterization.minEigenvalue);
        ch["formDeviation"] = num(a.characterization.formDeviation);
        ch["formConstant"] = a.characterization.formConstant;
    } else {
        ch["reason"] = a.characterization.reason;
    }
    return Json{{"sufficiency", sufficiency},
                {"constantRankCharacterization", ch}};
}

Json necessity_section(const StabilityAnalysis& a, int verbosity) {
    std::size_t covered = 0, nondegenerate = 0;
    for (const NecessityDirectionRecord& d : a.necessity.directions) {
        if (d.nondegenerate) ++nondegenerate;
        for (const auto& pl : d.lambdas)
            if (pl.covered) ++covered;
    }
    Json out{{"applicable", a.necessity.applicable},
             {"exactDirections", a.necessity.exactDirections},
             {"directionCount", a.necessity.directions.size()},
             {"nondegenerateDirections", nondegenerate},
             {"coveredPairs", covered}};
    if (verbosity >= 2) {
        Json dirs = Json::array();
        for (const NecessityDirectionRecord& d : a.necessity.directions) {
            Json pls = Json::array();
            for (const auto& pl : d.lambdas)
                pls.push_back(Json{{"lambda", vec_json(pl.lambda)},
                                   {"covered", pl.covered},
                                   {"viaNondegeneracy", pl.viaNondegeneracy},
                                   {"viaTwoRegularity", pl.viaTwoRegularity},
                                   {"jHat", indices1(pl.jHat)},
                                   {"directionQuadratic",
                                    num(pl.vQuadratic)}});
            dirs.push_back(Json{{"direction", vec_json(d.direction)},
                                {"nondegenerate", d.nondegenerate},
                                {"perMultiplier", pls}});
        }
        out["directions"] = dirs;
    }
    return out;
}

Json verdict_section(const StabilityAnalysis& a, const AnalysisConfig& cfg) {
    Json out{{"verdict", verdict_name(a.verdict)},
             {"reason", a.verdictReason},
             {"tiltBound", num(a.tiltBound)},
             {"boundExact", a.boundExact}};
    if (a.verdict == Verdict::TILT_STABLE_CERTIFIED ||
        a.verdict == Verdict::SUFFICIENT_ONLY) {
        // strictness margin around the curvature bound: values inside this
        // band are indistinguishable from the threshold case
        double eps = cfg.strictTol * (1.0 + std::abs(a.tiltBound));
        out["noGapBand"] = Json::array(
            {num(std::max(0.0, a.tiltBound - eps)), num(a.tiltBound + eps)});
    } else {
        out["noGapBand"] = Json(nullptr);
    }
    return out;
}

Json probe_config_section(const TiltProbeConfig& c) {
    return Json{{"gamma", num(c.gamma)},
                {"delta", num(c.effectiveDelta())},
                {"gridPerAxis", c.gridPerAxis},
                {"gridCap", c.gridCap},
                {"starts", c.starts},
                {"clusterTol", num(c.effectiveClusterTol())},
                {"feasTol", num(c.feasTol)},
                {"stationarityTol", num(c.stationarityTol)}};
}

Json oracle_section(const TiltProbeReport& r) {
    std::size_t multi = 0;
    for (const TiltedSolve& s : r.solves)
        if (s.multiValued) ++multi;
    Json out{{"stableEvidence", r.stableEvidence},
             {"unstableWitness", r.unstableWitness},
             {"lipschitzEstimate", num(r.lipschitzEstimate)},
             {"tiltCount", r.tiltCount},
             {"multiValuedCount", multi},
             {"maxResidual", num(r.maxResidual)},
             {"maxStationarity", num(r.maxStationarity)}};
    if (r.unstableWitness) {
        out["witness"] = Json{{"tilt", vec_json(r.witnessTilt)},
                              {"separation", num(r.witnessSeparation)},
                              {"clusters", vecs_json(r.witnessClusters)}};
    } else {
        out["witness"] = Json(nullptr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// text rendering

std::string fmt(double x) {
    if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string fmt_vec(const Vec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt(v[i]);
    }
    return s + ")";
}

std::string fmt_indices(const std::vector<std::size_t>& idx) {
    if (idx.empty()) return "{}";
    std::string s = "{";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(idx[i] + 1);
    }
    return s + "}";
}

void text_header(std::ostringstream& os, const ProblemSpec& p) {
    os << kToolName << " " << kToolVersion << "\n";
    os << "problem: dimension " << p.dimension << ", "
       << p.equalities.size() << " equalities, " << p.inequalities.size()
       << " inequalities\n";
    os << "candidate point: " << fmt_vec(p.point) << "\n";
}

void text_cqs(std::ostringstream& os, const StabilityAnalysis& a) {
    os << "constraint qualifications:\n";
    os << "  linear independence: " << (a.licq.holds ? "holds" : "fails")
       << " (rank " << a.licq.rank << " of " << a.licq.rowCount
       << " active gradients)\n";
    os << "  positive linear independence: "
       << (a.mfcq.holds ? "holds" : "fails");
    if (!a.mfcq.holds && !a.mfcq.failureWitness.empty())
        os << ", witness multiplier " << fmt_vec(a.mfcq.failureWitness);
    if (a.mfcq.holds)
        os << ", modulus estimate " << fmt(a.mfcq.modulusEstimate)
           << " (not certified)";
    os << "\n";
    os << "  constant rank (sampled): " << sampled_name(a.crcq.status);
    if (a.crcq.status == SampledStatus::FailsWithWitness)
        os << ", subset " << fmt_indices(a.crcq.witnessSubset) << " rank "
           << a.crcq.rankAtCandidate << " -> " << a.crcq.rankAtPoint;
    os << "\n";
    os << "  metric subregularity (sampled): " << sampled_name(a.mscq.status)
       << ", kappa estimate " << fmt(a.mscq.kappaEstimate) << "\n";
    os << "  bounded extreme points (sampled): "
       << sampled_name(a.bepp.status) << ", estimate "
       << fmt(a.bepp.estimate) << "\n";
    os << "  curvature condition for subregularity: "
       << soscms_name(a.soscms.status)
       << (a.soscms.exact ? " (exact)" : " (sampled)");
    if (a.soscms.status == SoscmsStatus::FailsWithWitness)
        os << ", direction " << fmt_vec(a.soscms.witnessDirection);
    os << "\n";
}

void text_verdict(std::ostringstream& os, const StabilityAnalysis& a) {
    os << "verdict: " << verdict_name(a.verdict) << "  tilt bound: "
       << fmt(a.tiltBound) << (a.boundExact ? " (exact)" : " (upper bound)")
       << "\n";
    os << "reason: " << a.verdictReason << "\n";
}

void text_oracle(std::ostringstream& os, const TiltProbeReport& r) {
    os << "numerical probe: "
       << (r.stableEvidence
               ? "stable evidence"
               : (r.unstableWitness ? "UNSTABLE WITNESS" : "no evidence"))
       << ", Lipschitz estimate " << fmt(r.lipschitzEstimate) << " over "
       << r.tiltCount << " tilts\n";
    if (r.unstableWitness) {
        os << "  witness tilt " << fmt_vec(r.witnessTilt) << " separates "
           << r.witnessClusters.size() << " clusters by "
           << fmt(r.witnessSeparation) << "\n";
        for (const Vec& c : r.witnessClusters)
            os << "    minimizer " << fmt_vec(c) << "\n";
    }
    os << "  worst constraint residual " << fmt(r.maxResidual)
       << ", worst stationarity " << fmt(r.maxStationarity) << "\n";
}

}  // namespace

std::string render_json(const StabilityAnalysis& a, const AnalysisConfig& cfg,
                        const TiltProbeReport* oracle) {
    Json doc{{"tool", tool_section()},
             {"problem", problem_section(a.problem)},
             {"feasibility", feasibility_section(a)},
             {"firstOrder", first_order_section(a)},
             {"cqs", cqs_section(a)},
             {"multipliers", multipliers_section(a)},
             {"criticalCone", cone_section(a)},
             {"extremeMultipliers", extremes_section(a)},
             {"secondOrder", second_order_section(a)},
             {"necessity", necessity_section(a, cfg.verbosity)},
             {"verdict", verdict_section(a, cfg)}};
    if (oracle) doc["oracle"] = oracle_section(*oracle);
    doc["config"] = config_section(cfg);
    return doc.dump(2) + "\n";
}

std::string render_cqs_json(const StabilityAnalysis& a,
                            const AnalysisConfig& cfg) {
    Json doc{{"tool", tool_section()},
             {"problem", problem_section(a.problem)},
             {"feasibility", feasibility_section(a)},
             {"firstOrder", first_order_section(a)},
             {"cqs", cqs_section(a)},
             {"config", config_section(cfg)}};
    return doc.dump(2) + "\n";
}

std::string render_oracle_json(const ProblemSpec& p, const Vec& xbar,
                               const TiltProbeReport& r,
                               const TiltProbeConfig& cfg) {
    Json doc{{"tool", tool_section()},
             {"problem", problem_section(p)},
             {"candidate", vec_json(xbar)},
             {"oracle", oracle_section(r)},
             {"config", probe_config_section(cfg)}};
    return doc.dump(2) + "\n";
}

std::string render_text(const StabilityAnalysis& a, const AnalysisConfig& cfg,
                        const TiltProbeReport* oracle) {
    std::ostringstream os;
    if (cfg.verbosity <= 0) {
        text_verdict(os, a);
        return os.str();
    }
    text_header(os, a.problem);
    os << "feasibility: " << (a.feasible ? "ok" : "VIOLATED") << " (residual "
       << fmt(a.feasibilityResidual) << ")\n";
    os << "stationarity: " << (a.stationary ? "ok" : "NOT STATIONARY")
       << " (residual " << fmt(a.stationarityResidual) << ")\n";
    if (!a.feasible || !a.stationary) {
        text_verdict(os, a);
        return os.str();
    }
    os << "active inequalities: " << fmt_indices(a.active.inequalities)
       << "\n";
    text_cqs(os, a);

    os << "multipliers: " << a.multipliers.generators.vertices.size()
       << " vertices, " << a.multipliers.generators.rays.size()
       << " rays; strict support union "
       << fmt_indices(a.supportUnion) << "\n";
    if (cfg.verbosity >= 2)
        for (std::size_t i = 0;
             i < a.multipliers.generators.vertices.size(); ++i)
            os << "  vertex " << (i + 1) << ": "
               << fmt_vec(a.multipliers.generators.vertices[i])
               << " strict support "
               << fmt_indices(a.multipliers.vertexSupport[i]) << "\n";

    os << "critical cone: "
       << (a.cone.isZero() ? "{0}"
                           : (std::to_string(a.cone.generators.rays.size()) +
                              " rays, " +
                              std::to_string(
                                  a.cone.generators.lineality.size()) +
                              " lineality"))
       << " (dimension " << a.cone.dimension << ")\n";

    os << "extreme multipliers over critical directions: ";
    if (a.extremes.lambdas.empty())
        os << "empty";
    else
        os << a.extremes.lambdas.size() << " collected";
    os << (a.extremes.exact ? " (exact)" : " (sampled candidates)") << "\n";
    if (cfg.verbosity >= 2)
        for (std::size_t i = 0; i < a.extremes.lambdas.size(); ++i)
            os << "  lambda " << fmt_vec(a.extremes.lambdas[i])
               << " from direction "
               << fmt_vec(a.extremes.witnessDirection[i]) << "\n";

    os << "pointbased sufficiency: "
       << (a.sufficiency.holds ? "holds" : "fails")
       << (a.sufficiency.vacuous ? " vacuously" : "") << ", bound "
       << fmt(a.sufficiency.bound) << "\n";
    if (cfg.verbosity >= 2)
        for (const ReducedHessianRecord& r : a.sufficiency.records)
            os << "  lambda " << fmt_vec(r.lambda) << ": min eigenvalue "
               << fmt(r.minEigenvalue) << "\n";

    os << "constant-rank reduction: ";
    if (a.characterization.applicable)
        os << (a.characterization.holds ? "holds" : "fails")
           << ", min eigenvalue " << fmt(a.characterization.minEigenvalue)
           << ", bound " << fmt(a.characterization.bound);
    else
        os << "not applicable (" << a.characterization.reason << ")";
    os << "\n";

    os << "necessity coverage: "
       << (a.necessity.applicable ? "applicable" : "not applicable") << " ("
       << a.necessity.directions.size() << " directions"
       << (a.necessity.exactDirections ? ", exact" : ", sampled") << ")\n";

    text_verdict(os, a);
    if (oracle) text_oracle(os, *oracle);
    return os.str();
}

std::string render_cqs_text(const StabilityAnalysis& a,
                            const AnalysisConfig& cfg) {
    std::ostringstream os;
    text_header(os, a.problem);
    os << "feasibility: " << (a.feasible ? "ok" : "VIOLATED") << " (residual "
       << fmt(a.feasibilityResidual) << ")\n";
    os << "stationarity: " << (a.stationary ? "ok" : "NOT STATIONARY")
       << " (residual " << fmt(a.stationarityResidual) << ")\n";
    if (a.feasible) text_cqs(os, a);
    (void)cfg;
    return os.str();
}

std::string render_oracle_text(const TiltProbeReport& r,
                               const TiltProbeConfig& cfg) {
    std::ostringstream os;
    os << kToolName << " " << kToolVersion << "\n";
    os << "tilt probe: ball radius " << fmt(cfg.gamma) << ", tilt radius "
       << fmt(cfg.effectiveDelta()) << ", " << cfg.starts << " starts\n";
    text_oracle(os, r);
    return os.str();
}

}  // namespace tilt
