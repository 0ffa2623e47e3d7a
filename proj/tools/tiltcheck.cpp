// tiltcheck: decide and certify tilt stability of a candidate local
// minimizer, cross-check it numerically, and manage the bundled examples.
//
//   tiltcheck analyze file.nlp [--json out.json] [--oracle] ...
//   tiltcheck cqs     file.nlp [--partition "E1=1,2;I1=3"] ...
//   tiltcheck oracle  file.nlp [--gamma R] [--delta R] [--grid N] [--starts N]
//   tiltcheck perturb file.nlp [--out emitted.nlp]
//   tiltcheck corpus  [name] [--emit DIR]
//
// Exit codes: 0 = analysis ran, 2 = candidate infeasible / not stationary
// (or nothing to perturb), 1 = usage or input error.

#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tilt/corpus.hpp>
#include <tilt/oracle.hpp>
#include <tilt/report.hpp>
#include <tilt/stability.hpp>

namespace {

using tilt::AnalysisConfig;
using tilt::ProblemSpec;
using tilt::Vec;
using Json = nlohmann::ordered_json;

struct CommonOpts {
    std::string file;
    std::string jsonPath;
    std::string configPath;
    std::vector<std::string> params;
    double gamma = -1.0;
    double delta = -1.0;
    long long samples = -1;
    long long grid = -1;
    long long starts = -1;
    int verbosity = INT_MIN;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needsFile) {
    if (needsFile)
        cmd->add_option("file", o.file, "problem file")->required();
    cmd->add_option("--json", o.jsonPath,
                    "write the JSON report to this path ('-' for stdout)");
    cmd->add_option("--param", o.params,
                    "override a declared problem parameter, k=v");
    cmd->add_option("--config", o.configPath, "analysis config file");
    cmd->add_option("--gamma", o.gamma, "localization ball radius");
    cmd->add_option("--delta", o.delta, "tilt ball radius");
    cmd->add_option("--samples", o.samples, "sample count for CQ checks");
    cmd->add_option("--grid", o.grid, "tilt grid size per axis");
    cmd->add_option("--starts", o.starts, "multistart count for the probe");
    cmd->add_option("-v,--verbosity", o.verbosity, "text report verbosity");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, double> parse_params(
    const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const std::string& kv : kvs) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("--param expects k=v, got: " + kv);
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

AnalysisConfig load_config(const CommonOpts& o) {
    AnalysisConfig cfg;
    if (!o.configPath.empty()) cfg = tilt::parse_config(read_file(o.configPath));
    if (o.gamma > 0) cfg.oracleGamma = o.gamma;
    if (o.delta > 0) cfg.oracleDelta = o.delta;
    if (o.samples > 0) cfg.cqSampleCount = static_cast<std::size_t>(o.samples);
    if (o.grid > 0) cfg.oracleGridPerAxis = static_cast<std::size_t>(o.grid);
    if (o.starts > 0) cfg.oracleStarts = static_cast<std::size_t>(o.starts);
    if (o.verbosity != INT_MIN) cfg.verbosity = o.verbosity;
    return cfg;
}

tilt::TiltProbeConfig probe_config(const AnalysisConfig& cfg) {
    tilt::TiltProbeConfig pc;
    pc.gamma = cfg.oracleGamma;
    pc.delta = cfg.oracleDelta;
    pc.gridPerAxis = cfg.oracleGridPerAxis;
    pc.starts = cfg.oracleStarts;
    return pc;
}

ProblemSpec load_problem(const CommonOpts& o) {
    return tilt::parse_problem(read_file(o.file), parse_params(o.params));
}

// "E1=1,2;I1=3" with 1-based indices per kind
tilt::ConstraintPartition parse_partition(const std::string& text) {
    tilt::ConstraintPartition part;
    std::stringstream ss(text);
    std::string segment;
    while (std::getline(ss, segment, ';')) {
        if (segment.empty()) continue;
        std::size_t eq = segment.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--partition expects KEY=i,j;...");
        std::string key = segment.substr(0, eq);
        std::vector<std::size_t>* dst = nullptr;
        if (key == "E1")
            dst = &part.equalitiesNormalized;
        else if (key == "I1")
            dst = &part.inequalitiesNormalized;
        else
            throw std::runtime_error("--partition keys are E1 and I1");
        std::stringstream items(segment.substr(eq + 1));
        std::string item;
        while (std::getline(items, item, ',')) {
            if (item.empty()) continue;
            long v = std::stol(item);
            if (v < 1) throw std::runtime_error("partition indices are 1-based");
            dst->push_back(static_cast<std::size_t>(v - 1));
        }
    }
    return part;
}

// --json PATH writes the JSON document (or stdout for '-'); otherwise the
// text report goes to stdout
void emit(const CommonOpts& o, const std::string& jsonDoc,
          const std::string& textDoc) {
    if (o.jsonPath.empty()) {
        std::cout << textDoc;
    } else if (o.jsonPath == "-") {
        std::cout << jsonDoc;
    } else {
        std::ofstream out(o.jsonPath);
        if (!out) throw std::runtime_error("cannot write " + o.jsonPath);
        out << jsonDoc;
    }
}

int run_analyze(const CommonOpts& o, bool withOracle) {
    AnalysisConfig cfg = load_config(o);
    ProblemSpec p = load_problem(o);
    tilt::StabilityAnalysis a = tilt::analyze(p, cfg);

    tilt::TiltProbeReport probe;
    const tilt::TiltProbeReport* probePtr = nullptr;
    if (withOracle && a.feasible && a.stationary) {
        probe = tilt::tilt_probe(p, p.point, probe_config(cfg));
        probePtr = &probe;
    }
    emit(o, tilt::render_json(a, cfg, probePtr),
         tilt::render_text(a, cfg, probePtr));
    return (a.feasible && a.stationary) ? 0 : 2;
}

int run_cqs(const CommonOpts& o, const std::string& partitionText) {
    AnalysisConfig cfg = load_config(o);
    ProblemSpec p = load_problem(o);
    tilt::StabilityAnalysis a = tilt::analyze(p, cfg);
    if (!partitionText.empty() && a.feasible) {
        // re-run the curvature condition with the requested normalization
        tilt::PointData pd = tilt::eval_point(p, p.point);
        tilt::ActiveSet act = tilt::active_set(pd, cfg.activeTol);
        a.soscms = tilt::check_soscms(pd, act, parse_partition(partitionText),
                                      {}, cfg);
    }
    emit(o, tilt::render_cqs_json(a, cfg), tilt::render_cqs_text(a, cfg));
    return a.feasible ? 0 : 2;
}

int run_oracle(const CommonOpts& o) {
    AnalysisConfig cfg = load_config(o);
    ProblemSpec p = load_problem(o);
    tilt::PointData pd = tilt::eval_point(p, p.point);
    double worst = 0.0;
    for (const auto& c : pd.equalities)
        worst = std::max(worst, std::abs(c.value));
    for (const auto& c : pd.inequalities)
        worst = std::max(worst, std::max(0.0, c.value));
    if (worst > cfg.feasTol) {
        std::cerr << "candidate point is infeasible (residual " << worst
                  << ")\n";
        return 2;
    }
    tilt::TiltProbeConfig pc = probe_config(cfg);
    tilt::TiltProbeReport r = tilt::tilt_probe(p, p.point, pc);
    emit(o, tilt::render_oracle_json(p, p.point, r, pc),
         tilt::render_oracle_text(r, pc));
    return 0;
}

int run_perturb(const CommonOpts& o, const std::string& outPath) {
    AnalysisConfig cfg = load_config(o);
    ProblemSpec p = load_problem(o);
    tilt::StabilityAnalysis a = tilt::analyze(p, cfg);
    if (!a.feasible || !a.stationary) {
        std::cerr << "candidate point is infeasible or not stationary\n";
        return 2;
    }

    // a perturbation exists when some extreme multiplier leaves a flat
    // direction: a nonpositive reduced-curvature eigenpair
    std::size_t pick = a.sufficiency.records.size();
    for (std::size_t i = 0; i < a.sufficiency.records.size(); ++i) {
        const tilt::ReducedHessianRecord& r = a.sufficiency.records[i];
        if (!r.eigenvector.empty() && r.minEigenvalue <= cfg.strictTol) {
            pick = i;
            break;
        }
    }
    if (pick == a.sufficiency.records.size()) {
        std::cerr << "no flat curvature direction: every extreme multiplier "
                     "has strictly positive reduced curvature (or the "
                     "collection is empty)\n";
        return 2;
    }

    const tilt::ReducedHessianRecord& rec = a.sufficiency.records[pick];
    const Vec& lambda = a.extremes.lambdas[pick];
    const Vec& v = a.extremes.witnessDirection[pick];
    tilt::PerturbationResult pr =
        tilt::perturb_problem(p, a.point, lambda, rec.eigenvector, v, cfg);

    // verify the emitted constraints match the originals at the candidate
    // point through second order
    double worstErr = 0.0;
    const std::size_t l1 = p.equalities.size();
    for (std::size_t g = 0; g < l1 + p.inequalities.size(); ++g) {
        const tilt::ExprPtr& before =
            g < l1 ? p.equalities[g] : p.inequalities[g - l1];
        const tilt::ExprPtr& after = g < l1
                                         ? pr.perturbed.equalities[g]
                                         : pr.perturbed.inequalities[g - l1];
        tilt::Taylor2 tb = tilt::eval_taylor(before, p.point);
        tilt::Taylor2 ta = tilt::eval_taylor(after, p.point);
        worstErr = std::max(worstErr, std::abs(tb.value - ta.value));
        for (std::size_t i = 0; i < p.dimension; ++i) {
            worstErr =
                std::max(worstErr, std::abs(tb.gradient[i] - ta.gradient[i]));
            for (std::size_t j = 0; j < p.dimension; ++j)
                worstErr = std::max(
                    worstErr, std::abs(tb.hessian(i, j) - ta.hessian(i, j)));
        }
    }
    bool pass = worstErr <= 1e-8;

    std::string emitted = outPath;
    if (emitted.empty()) {
        std::string stem = o.file;
        std::size_t slash = stem.find_last_of('/');
        if (slash != std::string::npos) stem = stem.substr(slash + 1);
        std::size_t dot = stem.find_last_of('.');
        if (dot != std::string::npos) stem = stem.substr(0, dot);
        emitted = stem + ".perturbed.nlp";
    }
    {
        std::ofstream out(emitted);
        if (!out) throw std::runtime_error("cannot write " + emitted);
        out << tilt::print_problem(pr.perturbed);
    }

    if (!o.jsonPath.empty()) {
        Json doc{{"tool",
                  Json{{"name", tilt::kToolName},
                       {"version", tilt::kToolVersion}}},
                 {"emittedFile", emitted},
                 {"direction", pr.v},
                 {"dualVector", pr.z},
                 {"bendRadius", pr.r},
                 {"pickedUpConstraints", Json::array()},
                 {"secondOrderMatch",
                  Json{{"pass", pass}, {"worstError", worstErr}}}};
        for (std::size_t i : pr.iHat)
            doc["pickedUpConstraints"].push_back(i + 1);
        emit(o, doc.dump(2) + "\n", "");
    } else {
        std::printf("emitted %s\n", emitted.c_str());
        std::printf("bend radius %.9g, dual vector (", pr.r);
        for (std::size_t i = 0; i < pr.z.size(); ++i)
            std::printf("%s%.9g", i ? ", " : "", pr.z[i]);
        std::printf("), constraints picked up:");
        for (std::size_t i : pr.iHat) std::printf(" %zu", i + 1);
        std::printf("\n");
        std::printf("second-order match at the candidate point: %s "
                    "(worst error %.3g)\n",
                    pass ? "PASS" : "FAIL", worstErr);
    }
    return pass ? 0 : 1;
}

int run_corpus(const std::string& name, const std::string& emitDir) {
    const auto& entries = tilt::corpus();
    if (!emitDir.empty()) {
        for (const tilt::CorpusEntry& e : entries) {
            std::ofstream pf(emitDir + "/" + e.name + ".nlp");
            if (!pf)
                throw std::runtime_error("cannot write into " + emitDir);
            pf << e.text;
            Json meta = Json::object();
            for (const auto& [k, v] : e.expected) meta[k] = v;
            std::ofstream mf(emitDir + "/" + e.name + ".expected.json");
            mf << meta.dump(2) << "\n";
        }
        std::printf("emitted %zu problems into %s\n", entries.size(),
                    emitDir.c_str());
        return 0;
    }
    if (!name.empty()) {
        const tilt::CorpusEntry* e = tilt::corpus_find(name);
        if (!e) {
            std::cerr << "unknown corpus entry: " << name << "\n";
            return 1;
        }
        std::cout << e->text;
        return 0;
    }
    for (const tilt::CorpusEntry& e : entries) {
        std::printf("%-6s %s\n", e.name.c_str(), e.summary.c_str());
        for (const auto& [k, v] : e.expected)
            std::printf("       %s: %s\n", k.c_str(), v.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilt-stability analyzer"};
    app.require_subcommand(1);

    CommonOpts aOpts, cOpts, oOpts, pOpts;
    bool withOracle = false;
    std::string partitionText, perturbOut, corpusName, emitDir;

    CLI::App* cmdAnalyze = app.add_subcommand(
        "analyze", "full stability analysis of a candidate point");
    add_common(cmdAnalyze, aOpts, true);
    cmdAnalyze->add_flag("--oracle", withOracle,
                         "also run the numerical tilt probe");

    CLI::App* cmdCqs = app.add_subcommand(
        "cqs", "constraint-qualification checks only");
    add_common(cmdCqs, cOpts, true);
    cmdCqs->add_option("--partition", partitionText,
                       "normalized blocks for the curvature condition, "
                       "e.g. \"E1=1,2;I1=3\"");

    CLI::App* cmdOracle = app.add_subcommand(
        "oracle", "numerical tilt probe around the candidate point");
    add_common(cmdOracle, oOpts, true);

    CLI::App* cmdPerturb = app.add_subcommand(
        "perturb", "emit a constraint perturbation that destroys stability "
                   "along a flat direction");
    add_common(cmdPerturb, pOpts, true);
    cmdPerturb->add_option("--out", perturbOut, "emitted problem file path");

    CLI::App* cmdCorpus =
        app.add_subcommand("corpus", "list or materialize bundled examples");
    cmdCorpus->add_option("name", corpusName, "entry to print");
    cmdCorpus->add_option("--emit", emitDir,
                          "write problem files and expected metadata here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (cmdAnalyze->parsed()) return run_analyze(aOpts, withOracle);
        if (cmdCqs->parsed()) return run_cqs(cOpts, partitionText);
        if (cmdOracle->parsed()) return run_oracle(oOpts);
        if (cmdPerturb->parsed()) return run_perturb(pOpts, perturbOut);
        if (cmdCorpus->parsed()) return run_corpus(corpusName, emitDir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
