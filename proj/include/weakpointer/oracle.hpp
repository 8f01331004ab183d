#pragma once

#include <map>
#include <string>
#include <vector>

#include "weakpointer/circuit.hpp"
#include "weakpointer/pointer.hpp"
#include "weakpointer/types.hpp"

namespace weakpointer {

// Discretization of each meter axis: points samples spanning
// [-half_width * sigma, +half_width * sigma) with x_j = (j - points/2) * h.
// points must be even so that doubling nests the coarse grid exactly.
struct GridSpec {
    double half_width = 8.0;
    int points = 4096;
};

struct GridPortResult {
    double probability = 0.0;
    std::map<std::string, double> means;      // by device id; empty below threshold
    std::map<std::string, double> variances;
    std::map<std::string, double> weak_estimates;  // mean / snapped delta
};

struct GridResult {
    GridSpec grid;
    // Shifts are applied as exact index-space translations, so each delta is
    // snapped to the nearest grid multiple; the snapped value is what any
    // analytic comparison must use.
    std::map<std::string, double> snapped_deltas;
    std::map<std::string, double> snap_errors;
    std::map<PathId, GridPortResult> ports;
    // fluxes[k][p]: squared norm of the joint component on path p at cut k
    // (paths that never carry amplitude are omitted).
    std::vector<std::map<PathId, double>> fluxes;
    double max_norm_drift = 0.0;
};

// Brute-force verifier: propagates the joint photon x meters wavefunction on
// the tensor grid (points^n_devices values per live path). Throws GridError
// when a nonzero delta falls below the grid spacing or the grid parameters
// are out of range; device count is capped at 3.
GridResult grid_simulate(const Circuit& c, const PathId& source,
                         const std::vector<MeterDevice>& devices, const GridSpec& grid);

}  // namespace weakpointer
