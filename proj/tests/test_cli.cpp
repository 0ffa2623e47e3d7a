// End-to-end checks of the command-line tool: subcommands, exit codes,
// output routing, and report reproducibility.  The binary path arrives in
// TILTCHECK_BIN (set by the build).
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>
#include <tilt/expr.hpp>

using Json = nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

const char* bin() {
    const char* b = std::getenv("TILTCHECK_BIN");
    REQUIRE_MESSAGE(b != nullptr, "TILTCHECK_BIN must point at the tool");
    return b;
}

RunResult run(const std::string& args) {
    RunResult r;
    std::string cmd = std::string(bin()) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
        r.out.append(buf, n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string scratch_dir() {
    static std::string dir = [] {
        char tmpl[] = "/tmp/tiltcheck_cli_XXXXXX";
        char* d = mkdtemp(tmpl);
        REQUIRE(d != nullptr);
        return std::string(d);
    }();
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string corpus_file(const std::string& name) {
    static bool emitted = [] {
        RunResult r = run("corpus --emit " + scratch_dir());
        REQUIRE(r.code == 0);
        return true;
    }();
    (void)emitted;
    return scratch_dir() + "/" + name + ".nlp";
}

}  // namespace

TEST_CASE("corpus listing names every bundled example") {
    RunResult r = run("corpus");
    CHECK(r.code == 0);
    for (const char* name : {"ex81", "ex82", "ex82r", "ex83", "ex84"})
        CHECK(r.out.find(name) != std::string::npos);

    RunResult miss = run("corpus nosuch");
    CHECK(miss.code == 1);
}

TEST_CASE("corpus emit writes parseable problems and expected metadata") {
    std::string file = corpus_file("ex83");
    tilt::ProblemSpec p = tilt::parse_problem(read_file(file));
    CHECK(p.dimension == 3);
    CHECK(p.inequalities.size() == 2);

    Json meta = Json::parse(read_file(scratch_dir() + "/ex81.expected.json"));
    CHECK(meta["verdict"] == "TILT_STABLE_CERTIFIED");
    CHECK(meta["tiltBound"] == "0");

    // printing a single entry gives the same parseable text
    RunResult one = run("corpus ex83");
    CHECK(one.code == 0);
    CHECK(tilt::parse_problem(one.out).dimension == 3);
}

TEST_CASE("analyze reports are byte-identical across runs") {
    std::string file = corpus_file("ex81");
    std::string ja = scratch_dir() + "/a.json";
    std::string jb = scratch_dir() + "/b.json";
    REQUIRE(run("analyze " + file + " --json " + ja).code == 0);
    REQUIRE(run("analyze " + file + " --json " + jb).code == 0);
    std::string a = read_file(ja);
    CHECK(a == read_file(jb));

    // the document carries every section of the contract
    Json doc = Json::parse(a);
    for (const char* section :
         {"tool", "problem", "feasibility", "firstOrder", "cqs",
          "multipliers", "criticalCone", "extremeMultipliers", "secondOrder",
          "necessity", "verdict", "config"})
        CHECK_MESSAGE(doc.contains(section), section);
    CHECK(doc["tool"]["name"] == "tiltcheck");
    CHECK(doc["verdict"]["verdict"] == "TILT_STABLE_CERTIFIED");
    CHECK(doc["verdict"]["tiltBound"] == 0.0);
    CHECK(doc["multipliers"]["supportUnion"] == Json::array({1, 2, 3, 4}));
}

TEST_CASE("exit codes follow the contract") {
    CHECK(run("analyze " + corpus_file("ex81") + " --json /dev/null").code ==
          0);

    // infeasible candidate -> 2
    std::string bad = scratch_dir() + "/infeasible.nlp";
    write_file(bad,
               "dimension = 1\n"
               "objective = \"x1\"\n"
               "inequalities = [\"x1\"]\n"
               "point = [1]\n");
    CHECK(run("analyze " + bad + " --json /dev/null").code == 2);

    // stationarity failure -> 2
    std::string free = scratch_dir() + "/freefall.nlp";
    write_file(free,
               "dimension = 1\n"
               "objective = \"x1\"\n"
               "point = [0]\n");
    CHECK(run("analyze " + free + " --json /dev/null").code == 2);

    // usage errors -> 1
    CHECK(run("analyze").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("analyze /nonexistent.nlp").code == 1);
    CHECK(run("cqs " + corpus_file("ex82") + " --partition X=1").code == 1);
}

TEST_CASE("parameter overrides reach the analysis") {
    std::string file = corpus_file("ex82");
    RunResult stable =
        run("analyze " + file + " --param a=5 --param b=2 --json -");
    CHECK(stable.code == 0);
    Json sd = Json::parse(stable.out);
    CHECK(sd["verdict"]["verdict"] == "TILT_STABLE_CERTIFIED");
    CHECK(sd["verdict"]["tiltBound"] == 1.0);
    CHECK(sd["problem"]["params"]["a"] == 5.0);

    RunResult flat =
        run("analyze " + file + " --param a=0.5 --param b=0.5 --json -");
    CHECK(flat.code == 0);
    Json fd = Json::parse(flat.out);
    CHECK(fd["verdict"]["verdict"] == "NOT_TILT_STABLE_CERTIFIED");
}

TEST_CASE("cqs subcommand reports qualification facts") {
    RunResult r = run("cqs " + corpus_file("ex82") + " --json -");
    CHECK(r.code == 0);
    Json doc = Json::parse(r.out);
    CHECK_FALSE(doc["cqs"]["mfcq"]["holds"].get<bool>());
    CHECK(doc["cqs"]["mfcq"].contains("failureWitness"));
    CHECK(doc["cqs"]["crcq"]["status"] == "failsWithWitness");
    CHECK(doc["cqs"]["soscms"]["status"] == "holds");
    CHECK_FALSE(doc.contains("verdict"));  // CQ-only cut

    // an explicit partition naming all active inequalities matches default
    RunResult part = run("cqs " + corpus_file("ex82") +
                         " --partition I1=1,2,3 --json -");
    CHECK(part.code == 0);
    CHECK(Json::parse(part.out)["cqs"]["soscms"]["status"] == "holds");
}

TEST_CASE("output routing: json file vs text stdout") {
    std::string file = corpus_file("ex81");
    RunResult text = run("analyze " + file);
    CHECK(text.code == 0);
    CHECK(text.out.find("verdict: TILT_STABLE_CERTIFIED") !=
          std::string::npos);
    CHECK(text.out.find("\"tool\"") == std::string::npos);  // not JSON

    std::string jp = scratch_dir() + "/routed.json";
    RunResult toFile = run("analyze " + file + " --json " + jp);
    CHECK(toFile.code == 0);
    CHECK(toFile.out.empty());
    CHECK(Json::parse(read_file(jp)).contains("verdict"));
}

TEST_CASE("oracle subcommand reports stability evidence") {
    RunResult r = run("oracle " + corpus_file("ex83") +
                      " --grid 3 --starts 24 --json -");
    CHECK(r.code == 0);
    Json doc = Json::parse(r.out);
    CHECK(doc["oracle"]["stableEvidence"] == true);
    CHECK(doc["oracle"]["unstableWitness"] == false);
    CHECK(doc["oracle"]["tiltCount"] == 27);
    CHECK(doc["config"]["starts"] == 24);
}

TEST_CASE("perturb emits a flat-direction bend when one exists") {
    std::string out = scratch_dir() + "/bent.nlp";
    RunResult r =
        run("perturb " + corpus_file("ex83") + " --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
    tilt::ProblemSpec bent = tilt::parse_problem(read_file(out));
    CHECK(bent.dimension == 3);
    CHECK(bent.inequalities.size() == 2);

    // strictly positive curvature leaves nothing to bend
    RunResult none = run("perturb " + corpus_file("ex81") +
                         " --out " + scratch_dir() + "/nothing.nlp");
    CHECK(none.code == 2);
}
