#pragma once
// Rendering of analysis results: a schema-stable JSON document and a
// human-readable text summary ordered like the pipeline itself.  Rendering
// is deterministic — identical inputs give byte-identical output (fixed tool
// version, no timestamps, shortest round-trip number formatting).

#include <string>

#include "tilt/config.hpp"
#include "tilt/oracle.hpp"
#include "tilt/stability.hpp"

namespace tilt {

inline constexpr const char* kToolName = "tiltcheck";
inline constexpr const char* kToolVersion = "1.0.0";

// Full analysis document.  Sections: tool, problem, feasibility, firstOrder,
// cqs, multipliers, criticalCone, extremeMultipliers, secondOrder, necessity,
// verdict, oracle (only when a probe report is supplied), config.
// Constraint indices are 1-based per kind (equalities and inequalities each
// count from 1).  Non-finite numbers render as null.
std::string render_json(const StabilityAnalysis& a, const AnalysisConfig& cfg,
                        const TiltProbeReport* oracle = nullptr);

// Text summary in the same order; cfg.verbosity <= 0 prints only the verdict
// line, >= 2 adds per-multiplier and per-direction detail.
std::string render_text(const StabilityAnalysis& a, const AnalysisConfig& cfg,
                        const TiltProbeReport* oracle = nullptr);

// Constraint-qualification cut of the document: tool, problem, feasibility,
// firstOrder, cqs, config.
std::string render_cqs_json(const StabilityAnalysis& a,
                            const AnalysisConfig& cfg);
std::string render_cqs_text(const StabilityAnalysis& a,
                            const AnalysisConfig& cfg);

// Stand-alone numerical probe document: tool, problem, oracle, config.
std::string render_oracle_json(const ProblemSpec& p, const Vec& xbar,
                               const TiltProbeReport& r,
                               const TiltProbeConfig& cfg);
std::string render_oracle_text(const TiltProbeReport& r,
                               const TiltProbeConfig& cfg);

}  // namespace tilt
