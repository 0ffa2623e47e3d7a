#include "tilt/corpus.hpp"

namespace tilt {

namespace {

std::vector<CorpusEntry> build() {
    std::vector<CorpusEntry> out;

    out.push_back(CorpusEntry{
        "ex81",
        "four-fold degenerate corner: stability certified with empty "
        "extreme-multiplier set",
        "# Four inequalities meeting at the origin with a two-vertex\n"
        "# multiplier polytope and a trivial critical cone.\n"
        "dimension = 3\n"
        "objective = \"0.25*x1 + x3 + x3^2 - x1*x2\"\n"
        "equalities = []\n"
        "inequalities = [\"x1 - x3\", \"-x1 - x3\", \"x2 - x3\", \"-x2 - x3\"]\n"
        "point = [0, 0, 0]\n",
        {{"verdict", "TILT_STABLE_CERTIFIED"},
         {"tiltBound", "0"},
         {"multiplierVertices", "(0,0.25,0.375,0.375) (0.375,0.625,0,0)"},
         {"criticalCone", "{0}"},
         {"extremeMultipliers", "empty"}}});

    out.push_back(CorpusEntry{
        "ex82",
        "parabolic sandwich with parameters (a,b): stable iff a>1 and b>1, "
        "MFCQ and constant-rank both fail",
        "# Three smooth inequalities whose gradients collapse to a line at\n"
        "# the origin.  Stability depends on the objective curvature (a,b).\n"
        "dimension = 3\n"
        "params.a = 2\n"
        "params.b = 2\n"
        "objective = \"-x1 + (a/2)*x2^2 + (b/2)*x3^2\"\n"
        "equalities = []\n"
        "inequalities = [\"x1 - 0.5*x2^2\", \"x1 - 0.5*x3^2\", "
        "\"-x1 - 0.5*x2^2 - 0.5*x3^2\"]\n"
        "point = [0, 0, 0]\n",
        {{"stableIff", "a > 1 and b > 1"},
         {"boundFormula", "1/min(a-1, b-1)"},
         {"mfcq", "fails"},
         {"crcqSampled", "failsWithWitness"},
         {"soscms", "holds"},
         {"multiplierVertices", "(1,0,0) (0,1,0)"}}});

    out.push_back(CorpusEntry{
        "ex82r",
        "corner problem lifted by a quadratic coordinate: constant-rank "
        "characterization certifies bound 1 where the per-multiplier test "
        "fails",
        "# The ex81 corner with an extra 0.5*x4^2 term: the critical cone\n"
        "# becomes the x4 axis and the support union covers all four rows.\n"
        "dimension = 4\n"
        "objective = \"0.25*x1 + x3 + x3^2 - x1*x2 + 0.5*x4^2\"\n"
        "equalities = []\n"
        "inequalities = [\"x1 - x3\", \"-x1 - x3\", \"x2 - x3\", \"-x2 - x3\"]\n"
        "point = [0, 0, 0, 0]\n",
        {{"verdict", "TILT_STABLE_CERTIFIED"},
         {"tiltBound", "1"},
         {"supportUnion", "1 2 3 4"},
         {"reducedSubspace", "span{e4}"},
         {"reducedMinEigenvalue", "1"},
         {"perLambdaFailure",
          "lambda=(0.375,0.625,0,0) w=(0,1,0,0) quadratic 0"}}});

    out.push_back(CorpusEntry{
        "ex83",
        "redundant constraint pair: stable point the analyzer cannot "
        "certify either way",
        "# The second inequality is redundant but splits the multiplier\n"
        "# set; the second-order test dies at lambda=(0,1) with a zero\n"
        "# eigenvalue and no necessity route covers that multiplier.\n"
        "dimension = 3\n"
        "objective = \"-x1 + 0.5*x2^2\"\n"
        "equalities = []\n"
        "inequalities = [\"x1 + x3^2\", \"x1\"]\n"
        "point = [0, 0, 0]\n",
        {{"verdict", "INCONCLUSIVE"},
         {"sufficiencyWitness", "lambda=(0,1) w=(0,0,1) quadratic 0"},
         {"nondegenerateAtE2", "false"},
         {"twoRegularAtE2", "false"},
         {"oracle", "stableEvidence, Lipschitz estimate near 1"}}});

    out.push_back(CorpusEntry{
        "ex84",
        "quartic twin of ex83: identical derivatives through second order "
        "at the origin, yet not tilt-stable",
        "# Differs from ex83 only by the -x2^4 term, which is invisible to\n"
        "# every point-based second-order quantity at the origin.  Tilting\n"
        "# by (0,u,0) splits the minimizer into two points (0,u,+-u^2).\n"
        "dimension = 3\n"
        "objective = \"-x1 + 0.5*x2^2\"\n"
        "equalities = []\n"
        "inequalities = [\"x1 - x2^4 + x3^2\", \"x1\"]\n"
        "point = [0, 0, 0]\n",
        {{"verdict", "INCONCLUSIVE"},
         {"oracle", "unstableWitness, clusters (0,u,u^2) and (0,u,-u^2)"},
         {"pointDataMatches", "ex83"}}});

    return out;
}

}  // namespace

const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = build();
    return entries;
}

const CorpusEntry* corpus_find(const std::string& name) {
    for (const CorpusEntry& e : corpus())
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace tilt
