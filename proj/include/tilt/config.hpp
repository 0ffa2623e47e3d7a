#pragma once
// Shared tolerance/sampling knobs for the analyzer and the CLI.  The config
// file format is the same "key = value" line syntax as problem files.

#include <cstddef>
#include <string>

namespace tilt {

struct AnalysisConfig {
    // tolerances
    double activeTol = 1e-8;     // |q_i(xbar)| below this counts as active
    double feasTol = 1e-8;       // feasibility screen at the candidate point
    double rankTol = 1e-10;      // relative rank threshold
    double strictTol = 1e-9;     // strict positivity / multiplier support
    double dedupeTol = 1e-8;     // vertex dedupe (normalized)
    double lpPivotTol = 1e-9;    // simplex pivot tolerance
    double firstOrderTol = 1e-8; // stationarity residual scale

    // sampled CQ checks
    double cqRadius = 1e-3;
    std::size_t cqSampleCount = 64;

    // direction sampling on spheres inside cones
    std::size_t sphereSampleCount = 500;

    // subset enumeration caps
    std::size_t subsetCap = 4096;

    // numerical tilt probe knobs (mirrored into TiltProbeConfig by the CLI)
    double oracleGamma = 0.5;
    double oracleDelta = 0.025;
    std::size_t oracleGridPerAxis = 5;
    std::size_t oracleStarts = 64;

    int verbosity = 1;
};

AnalysisConfig parse_config(const std::string& text);
std::string print_config(const AnalysisConfig& c);

}  // namespace tilt
