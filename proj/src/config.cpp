#include "tilt/config.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "tilt/expr.hpp"

namespace tilt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Slot {
    std::function<void(AnalysisConfig&, const std::string&, int)> set;
};

double parse_double(const std::string& text, int line) {
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw ParseError("expected a number, got '" + text + "'", line, 1);
    return v;
}

std::size_t parse_size(const std::string& text, int line) {
    double v = parse_double(text, line);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ParseError("expected a nonnegative integer, got '" + text + "'",
                         line, 1);
    return static_cast<std::size_t>(v);
}

const std::map<std::string, Slot>& slots() {
    static const std::map<std::string, Slot> table = {
        {"activeTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.activeTol = parse_double(v, ln);
         }}},
        {"feasTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.feasTol = parse_double(v, ln);
         }}},
        {"rankTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.rankTol = parse_double(v, ln);
         }}},
        {"strictTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.strictTol = parse_double(v, ln);
         }}},
        {"dedupeTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.dedupeTol = parse_double(v, ln);
         }}},
        {"lpPivotTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.lpPivotTol = parse_double(v, ln);
         }}},
        {"firstOrderTol", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.firstOrderTol = parse_double(v, ln);
         }}},
        {"cqRadius", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.cqRadius = parse_double(v, ln);
         }}},
        {"cqSampleCount", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.cqSampleCount = parse_size(v, ln);
         }}},
        {"sphereSampleCount",
         {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.sphereSampleCount = parse_size(v, ln);
         }}},
        {"subsetCap", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.subsetCap = parse_size(v, ln);
         }}},
        {"oracleGamma", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.oracleGamma = parse_double(v, ln);
         }}},
        {"oracleDelta", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.oracleDelta = parse_double(v, ln);
         }}},
        {"oracleGridPerAxis",
         {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.oracleGridPerAxis = parse_size(v, ln);
         }}},
        {"oracleStarts", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.oracleStarts = parse_size(v, ln);
         }}},
        {"verbosity", {[](AnalysisConfig& c, const std::string& v, int ln) {
             c.verbosity = static_cast<int>(parse_size(v, ln));
         }}},
    };
    return table;
}

}  // namespace

AnalysisConfig parse_config(const std::string& text) {
    AnalysisConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineNo = 0;
    while (std::getline(in, raw)) {
        ++lineNo;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineNo, 1);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = slots().find(key);
        if (it == slots().end())
            throw ParseError("unknown config key '" + key + "'", lineNo, 1);
        it->second.set(cfg, value, lineNo);
    }
    return cfg;
}

std::string print_config(const AnalysisConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "activeTol = " << c.activeTol << "\n"
        << "feasTol = " << c.feasTol << "\n"
        << "rankTol = " << c.rankTol << "\n"
        << "strictTol = " << c.strictTol << "\n"
        << "dedupeTol = " << c.dedupeTol << "\n"
        << "lpPivotTol = " << c.lpPivotTol << "\n"
        << "firstOrderTol = " << c.firstOrderTol << "\n"
        << "cqRadius = " << c.cqRadius << "\n"
        << "cqSampleCount = " << c.cqSampleCount << "\n"
        << "sphereSampleCount = " << c.sphereSampleCount << "\n"
        << "subsetCap = " << c.subsetCap << "\n"
        << "oracleGamma = " << c.oracleGamma << "\n"
        << "oracleDelta = " << c.oracleDelta << "\n"
        << "oracleGridPerAxis = " << c.oracleGridPerAxis << "\n"
        << "oracleStarts = " << c.oracleStarts << "\n"
        << "verbosity = " << c.verbosity << "\n";
    return out.str();
}

}  // namespace tilt
