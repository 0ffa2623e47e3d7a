#pragma once
// Point-based stability analysis for nonlinear programs
//
//     minimize f(x)  subject to  q_i(x) = 0 (i in E),  q_i(x) <= 0 (i in I).
//
// Everything here works from derivative data at a single candidate point.
// The analyzer decides whether the point is a certifiably tilt-stable local
// minimizer: whether small linear tilts f - <v,.> move the local minimizer
// in a single-valued Lipschitz way, and with what Lipschitz bound.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tilt/config.hpp"
#include "tilt/expr.hpp"
#include "tilt/linalg.hpp"
#include "tilt/polyhedra.hpp"

namespace tilt {

// ---------------------------------------------------------------------------
// active set and multipliers

struct ActiveSet {
    std::vector<std::size_t> equalities;    // 0-based indices into equalities
    std::vector<std::size_t> inequalities;  // 0-based, active only
};

ActiveSet active_set(const PointData& pd, double activeTol);

// Lagrange multipliers live in R^{l1+l2}, ordered equalities first then
// inequalities.  Equality components are free, active inequality components
// are nonnegative, inactive inequality components are pinned to zero.
struct MultiplierSet {
    SignedPolyhedron polyhedron;  // {lambda : grad q^T lambda = xstar, signs}
    VertexSet generators;         // extreme points / rays / lineality
    bool feasible = false;        // nonempty, i.e. the point is stationary
    double residual = 0.0;        // ||grad q^T lambda - xstar|| at a witness
    Vec xstar;                    // -grad f(xbar)
    ActiveSet active;
    // strict support of each extreme point: active inequality indices with
    // lambda_i > strictTol * (1 + ||lambda||)
    std::vector<std::vector<std::size_t>> vertexSupport;
};

MultiplierSet multiplier_set(const PointData& pd, const Vec& xstar,
                             const ActiveSet& act,
                             const AnalysisConfig& cfg = {});

// strict support of one multiplier vector (ties resolve to "not supported")
std::vector<std::size_t> i_plus(const PointData& pd, const Vec& lambda,
                                double strictTol = 1e-9);

// union of strict supports over the whole multiplier set: for each active
// inequality, maximize lambda_i over the set; it belongs to the union when
// the maximum exceeds the threshold or is unbounded.
std::vector<std::size_t> i_plus_union(const PointData& pd,
                                      const MultiplierSet& ms,
                                      const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// constraint qualification checks

struct LicqResult {
    bool holds = false;
    std::size_t rank = 0;
    std::size_t rowCount = 0;
};

LicqResult check_licq(const PointData& pd, const ActiveSet& act,
                      const AnalysisConfig& cfg = {});

struct MfcqResult {
    bool holds = false;
    bool equalityGradientsIndependent = false;
    // when MFCQ fails: a nonzero multiplier with grad q^T lambda = 0,
    // nonnegative on active inequalities, l1-normalized
    Vec failureWitness;
    // diagnostic estimate of the MFCQ modulus (not certified): the largest
    // 1/||grad q^T lambda|| seen over the normalized multiplier section
    double modulusEstimate = 0.0;
    bool estimateCertified = false;  // always false; estimate is a search
};

MfcqResult check_mfcq(const PointData& pd, const ActiveSet& act,
                      const AnalysisConfig& cfg = {});

enum class SampledStatus { HoldsSampled, FailsWithWitness, Inconclusive };

struct CrcqResult {
    SampledStatus status = SampledStatus::Inconclusive;
    bool subsetsTruncated = false;     // subset enumeration hit the cap
    // witness when rank constancy breaks within the sampled radius
    std::vector<std::size_t> witnessSubset;  // 0-based constraint indices
    Vec witnessPoint;
    std::size_t rankAtPoint = 0;
    std::size_t rankAtCandidate = 0;
    double radius = 0.0;
};

CrcqResult check_crcq_sampled(const ProblemSpec& problem, const PointData& pd,
                              const ActiveSet& act, double radius = 1e-3,
                              std::size_t sampleCount = 64,
                              std::size_t subsetCap = 4096);

struct MscqResult {
    SampledStatus status = SampledStatus::Inconclusive;
    double kappaEstimate = 0.0;   // max dist/residual over all shells
    std::vector<double> shellKappa;  // per shell, radius * 2^-k
    double growthLimit = 10.0;
};

MscqResult check_mscq_sampled(const ProblemSpec& problem, const PointData& pd,
                              double radius = 1e-3,
                              std::size_t sampleCount = 64);

struct BeppResult {
    SampledStatus status = SampledStatus::Inconclusive;
    bool equalityGradientsIndependent = false;
    double estimate = 0.0;           // max 1/sigma_min over sampled bases
    std::vector<double> shellEstimate;
    double growthLimit = 10.0;
};

BeppResult check_bepp_sampled(const ProblemSpec& problem, const PointData& pd,
                              double radius = 1e-3,
                              std::size_t sampleCount = 64);

// partition of the constraints for the metric-subregularity sufficient
// condition: the first block is the part whose multipliers get normalized
struct ConstraintPartition {
    std::vector<std::size_t> equalitiesNormalized;    // E1, 0-based
    std::vector<std::size_t> inequalitiesNormalized;  // I1, 0-based, active
};

enum class SoscmsStatus { Holds, HoldsSampled, FailsWithWitness, Inconclusive };

struct SoscmsResult {
    SoscmsStatus status = SoscmsStatus::Inconclusive;
    bool exact = false;         // linearized cone was {0}, ray, line, subspace
    Vec witnessDirection;       // u with a certifying multiplier, on failure
    Vec witnessMultiplier;      // lambda, l1(E1 u I1) = 1
    std::string note;
};

SoscmsResult check_soscms(const PointData& pd, const ActiveSet& act,
                          const ConstraintPartition& partition,
                          const std::vector<Vec>& directionCandidates = {},
                          const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// critical cone and directional multiplier faces

struct CriticalCone {
    // rows of the H-representation, as gradients at the candidate point
    std::vector<std::size_t> equalityRows;    // constraint indices: E u I+
    std::vector<std::size_t> inequalityRows;  // active \ I+
    VertexSet generators;  // rays + lineality in x-space; no vertices
    std::size_t dimension = 0;
    bool isZero() const {
        return generators.rays.empty() && generators.lineality.empty();
    }
};

CriticalCone critical_cone(const PointData& pd, const Vec& xstar,
                           const MultiplierSet& ms,
                           const AnalysisConfig& cfg = {});

bool cone_contains(const PointData& pd, const CriticalCone& K, const Vec& v,
                   double tol = 1e-9);

// multipliers that maximize the direction's curvature form
// sum_i lambda_i <v, hess q_i v> over the multiplier set
struct DirectionalMultipliers {
    Vec direction;
    FaceResult face;              // argmax face of the curvature objective
    bool unboundedObjective = false;  // sup not attained: flags a violation
};

DirectionalMultipliers directional_multipliers(const PointData& pd,
                                               const MultiplierSet& ms,
                                               const Vec& v,
                                               const AnalysisConfig& cfg = {});

// extreme multipliers collected across critical directions, with the
// witnessing direction of each
struct ExtremeMultipliers {
    std::vector<Vec> lambdas;
    std::vector<Vec> witnessDirection;  // parallel to lambdas
    std::vector<Vec> directionsUsed;
    bool exact = false;       // cone was {0}, a single ray, or a line
    bool anyUnbounded = false;
    // some face was nonempty but had no extreme points (multiplier set is not
    // pointed); an empty collection then proves nothing
    bool facesVertexFree = false;
};

ExtremeMultipliers lambda_bar_E(const PointData& pd, const MultiplierSet& ms,
                                const CriticalCone& K,
                                const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// second-order records

struct ReducedHessianRecord {
    Vec lambda;
    std::vector<std::size_t> support;  // E u I+(lambda), constraint indices
    Mat subspaceBasis;   // orthonormal columns spanning the gradient nullspace
    Mat reduced;         // B^T hess L(xbar, lambda) B
    double minEigenvalue = 0.0;  // +inf sentinel when the subspace is {0}
    Vec eigenvector;     // in R^n (lifted from the subspace), empty if none
};

ReducedHessianRecord reduced_hessian_record(const PointData& pd,
                                            const Vec& lambda,
                                            const AnalysisConfig& cfg = {});

struct SufficiencyResult {
    bool holds = false;
    bool vacuous = false;  // no extreme multipliers: holds with bound 0
    std::vector<ReducedHessianRecord> records;
    double bound = 0.0;          // max over records of 1/minEigenvalue
    std::size_t worstIndex = 0;  // record attaining the smallest eigenvalue
};

SufficiencyResult sufficient_condition(const PointData& pd,
                                       const ExtremeMultipliers& extremes,
                                       std::optional<double> kappa = {},
                                       const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// necessity side: when does failure of the second-order condition certify
// instability, and when is the bound exact

// (a) the directional multiplier face is a singleton without recession
bool nondegenerate_in_direction(const DirectionalMultipliers& dm);

// (b') 2-regularity of the subsystem {q_i : i in indices} in direction v:
// rank [G | M] = s where G stacks the gradients, N spans ker G, and row i of
// M is v^T hess q_i N
bool two_regularity(const PointData& pd,
                    const std::vector<std::size_t>& indices, const Vec& v,
                    const AnalysisConfig& cfg = {});

// index sets J inside the directionally active inequalities I(xbar; v) that
// admit a second-order feasible arc; maximal members are the candidates for
// the 2-regularity route
struct DirectionalIndexSets {
    // all index vectors hold 0-based positions into the inequality list
    std::vector<std::size_t> directionallyActive;  // I(xbar; v)
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::vector<std::size_t>> maximal;
    bool truncated = false;
};

DirectionalIndexSets xi_and_maximal_J(const PointData& pd,
                                      const ActiveSet& act, const Vec& v,
                                      std::size_t subsetCap = 4096,
                                      const AnalysisConfig& cfg = {});

struct NecessityDirectionRecord {
    Vec direction;
    bool nondegenerate = false;  // route (a)
    struct PerLambda {
        Vec lambda;
        bool covered = false;
        bool viaNondegeneracy = false;
        bool viaTwoRegularity = false;
        std::vector<std::size_t> jHat;  // maximal set used by route (b)
        // <v, hess L(lambda) v>: nonpositive at a covered pair certifies
        // that the point is not tilt-stable
        double vQuadratic = 0.0;
    };
    std::vector<PerLambda> lambdas;
};

struct NecessityResult {
    bool applicable = false;  // every extreme multiplier has a verified route
    bool exactDirections = false;  // directions enumerated exactly
    std::vector<NecessityDirectionRecord> directions;
};

NecessityResult necessity_applicability(const PointData& pd,
                                        const MultiplierSet& ms,
                                        const CriticalCone& K,
                                        const ExtremeMultipliers& extremes,
                                        const AnalysisConfig& cfg = {});

// characterization under constant-rank of the active gradients: reduce the
// Lagrangian Hessian at an inner multiplier onto the nullspace of the
// E u (support union) gradients
struct CrcqCharacterization {
    bool applicable = false;
    std::string reason;          // why not applicable, when it is not
    Vec lambdaTilde;             // inner multiplier (support = union support)
    Mat subspaceBasis;           // W
    Mat reduced;
    double minEigenvalue = 0.0;
    bool holds = false;          // minEigenvalue > strictTol (or 1/kappa +)
    double bound = 0.0;          // 1/minEigenvalue when it holds
    // diagnostic: the reduced quadratic form should not depend on the choice
    // of multiplier; largest relative deviation across extreme points
    double formDeviation = 0.0;
    bool formConstant = false;
};

CrcqCharacterization crcq_characterization(const PointData& pd,
                                           const MultiplierSet& ms,
                                           const CrcqResult& crcq,
                                           const CriticalCone& K,
                                           std::optional<double> kappa = {},
                                           const AnalysisConfig& cfg = {});

// strict-complementarity-style direction used by diagnostics: an inner
// multiplier realizing the full support union, and a direction that is
// orthogonal to supported gradients while strictly decreasing the rest
struct InnerMultiplierDirection {
    Vec lambdaTilde;
    Vec direction;
    double margin = 0.0;   // achieved strict-decrease margin
    bool degenerate = false;  // margin below tolerance
};

InnerMultiplierDirection strict_complementary_direction(
    const PointData& pd, const ActiveSet& act, const MultiplierSet& ms,
    const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// constraint perturbation that destroys tilt stability along a flat direction

struct PerturbationResult {
    ProblemSpec perturbed;
    Vec v;                      // critical direction
    Vec z;                      // adjusted dual vector, <z, v> > 0
    double r = 0.0;             // radius where the bending switches on
    std::vector<std::size_t> iHat;  // constraints picked up by the arc
};

// lambda must lie in the directional face Lambda(v); w is a direction in the
// reduced subspace with <w, hess L w> <= 0.  Throws std::invalid_argument
// when the dual system is infeasible (i.e. lambda is not in the face).
PerturbationResult perturb_problem(const ProblemSpec& problem,
                                   const PointData& pd, const Vec& lambda,
                                   const Vec& w, const Vec& v,
                                   const AnalysisConfig& cfg = {});

// ---------------------------------------------------------------------------
// full pipeline

enum class Verdict {
    TILT_STABLE_CERTIFIED,
    SUFFICIENT_ONLY,
    NOT_TILT_STABLE_CERTIFIED,
    INCONCLUSIVE
};

std::string verdict_name(Verdict v);

struct StabilityAnalysis {
    ProblemSpec problem;
    PointData point;
    bool feasible = false;
    double feasibilityResidual = 0.0;

    bool stationary = false;       // multiplier set nonempty
    double stationarityResidual = 0.0;

    ActiveSet active;
    MultiplierSet multipliers;
    std::vector<std::size_t> supportUnion;  // i_plus_union

    LicqResult licq;
    MfcqResult mfcq;
    CrcqResult crcq;
    MscqResult mscq;
    BeppResult bepp;
    SoscmsResult soscms;

    CriticalCone cone;
    ExtremeMultipliers extremes;
    SufficiencyResult sufficiency;
    NecessityResult necessity;
    CrcqCharacterization characterization;

    Verdict verdict = Verdict::INCONCLUSIVE;
    double tiltBound = 0.0;        // valid when certified stable
    bool boundExact = false;
    std::string verdictReason;
};

StabilityAnalysis analyze(const ProblemSpec& problem,
                          const AnalysisConfig& cfg = {});

// deterministic unit directions spanning the sphere of a subspace given by
// orthonormal columns; used for direction sampling inside cones
std::vector<Vec> sphere_directions(const Mat& basis, std::size_t count);

}  // namespace tilt
