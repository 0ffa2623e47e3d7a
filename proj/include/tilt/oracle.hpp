#pragma once

// Numerical cross-check: probe how the local minimizers of the tilted
// problem  min f(x) - <v, x>  over a ball around the candidate point move
// as the tilt v varies.  A stable point keeps a single, Lipschitz-moving
// minimizer; a witness of instability is one tilt whose minimizer set
// splits into well-separated clusters of equal value.

#include <cstddef>
#include <vector>

#include <tilt/expr.hpp>

namespace tilt {

struct TiltProbeConfig {
    double gamma = 0.5;            // localization radius around the point
    double delta = 0.0;            // tilt magnitude; 0 -> gamma / 20
    std::size_t gridPerAxis = 5;   // tilt grid resolution per coordinate
    std::size_t gridCap = 2000;    // switch to low-discrepancy tilts above
    std::size_t starts = 64;       // multistart count per tilt
    double clusterTol = 0.0;       // minimizer clustering radius; 0 -> 1e-4 * gamma
    double tieTol = 0.0;           // value tie tolerance; 0 -> 1e-8 * (1 + |best|)
    double feasTol = 1e-8;         // max constraint violation for a minimizer
    double stationarityTol = 1e-6; // max stationarity residual for a minimizer

    double effectiveDelta() const { return delta > 0.0 ? delta : gamma / 20.0; }
    double effectiveClusterTol() const {
        return clusterTol > 0.0 ? clusterTol : 1e-4 * gamma;
    }
};

// minimizer clusters of one tilted problem
struct TiltedSolve {
    Vec tilt;
    std::vector<Vec> minimizers;   // one representative per cluster
    std::vector<double> values;    // tilted objective at each representative
    double bestValue = 0.0;
    bool multiValued = false;      // >= 2 clusters, tied values, separated by
                                   // more than 10x the clustering radius
    double separation = 0.0;       // largest distance between representatives
    double residual = 0.0;         // worst feasibility violation among them
    double stationarity = 0.0;     // worst stationarity residual among them
};

struct TiltProbeReport {
    bool stableEvidence = false;   // every probed tilt had a single cluster
    bool unstableWitness = false;  // some tilt split into separated clusters
    Vec witnessTilt;               // the splitting tilt (largest separation)
    std::vector<Vec> witnessClusters;  // its two most separated minimizers
    double witnessSeparation = 0.0;
    // largest ||M(v1) - M(v2)|| / ||v1 - v2|| over single-cluster tilt pairs
    // that are at least a tenth of the tilt magnitude apart
    double lipschitzEstimate = 0.0;
    std::size_t tiltCount = 0;
    double maxResidual = 0.0;      // across all kept minimizers
    double maxStationarity = 0.0;
    std::vector<TiltedSolve> solves;  // in probing order
};

// minimize f(x) - <tilt, x> subject to the constraints, localized to the
// ball of radius cfg.gamma around xbar: multistart penalty descent with an
// active-set polish, followed by value filtering and distance clustering
TiltedSolve solve_tilted(const ProblemSpec& problem, const Vec& xbar,
                         const Vec& tilt, const TiltProbeConfig& cfg = {});

// sweep tilts over a grid in the cube [-delta, delta]^n (low-discrepancy
// ball samples when the grid would exceed cfg.gridCap) and aggregate
TiltProbeReport tilt_probe(const ProblemSpec& problem, const Vec& xbar,
                           const TiltProbeConfig& cfg = {});

}  // namespace tilt
