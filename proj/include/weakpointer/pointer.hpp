#pragma once

#include <map>
#include <string>
#include <vector>

#include "weakpointer/circuit.hpp"
#include "weakpointer/types.hpp"

namespace weakpointer {

// Gaussian meter attached to one (path, stage) cell. The pointer picks up a
// translation by delta when the photon enters that cell.
struct MeterDevice {
    std::string id;
    PathId path;
    int stage = 0;
    double delta = 0.0;
    double sigma = 1.0;
};

void validate_devices(const Circuit& c, const std::vector<MeterDevice>& devices);

// One Feynman trajectory through the network. shifts holds an entry per
// meter id: the meter's delta if the trajectory passes its (path, stage),
// else 0. Histories stopped by an absorber carry the absorbing port as
// terminal and a shorter trace.
struct History {
    PathId terminal;
    cplx amplitude;
    std::map<std::string, double> shifts;
    std::vector<PathId> trace;  // path occupied at each stage cut
};

std::vector<History> enumerate_histories(const Circuit& c, const PathId& source,
                                         const std::vector<MeterDevice>& devices);

// Histories truncated at one stage cut (devices at the cut stage included).
std::vector<History> partial_histories(const Circuit& c, const PathId& source,
                                       const std::vector<MeterDevice>& devices, int stage);

// Exact post-selected meter readout at one terminal, all orders in delta.
// means and weak_estimates are keyed by device id; weak_estimates skips
// devices with delta == 0.
struct PointerReport {
    PathId terminal;
    double postselection_probability = 0.0;
    std::map<std::string, double> means;
    std::map<std::string, double> weak_estimates;
};

// Throws PostselectionError when the port probability is below 1e-14.
PointerReport pointer_report(const Circuit& c, const PathId& source, const PathId& terminal,
                             const std::vector<MeterDevice>& devices);

// Reports for every terminal port. Ports below the post-selection threshold
// keep their probability but carry no means.
std::vector<PointerReport> all_pointer_reports(const Circuit& c, const PathId& source,
                                               const std::vector<MeterDevice>& devices);

// Probability of finding the photon at (path, stage) with the meters
// attached. Meter back-action makes this differ from internal_flux.
double flux_with_devices(const Circuit& c, const PathId& source, const PathId& path, int stage,
                         const std::vector<MeterDevice>& devices);

// Split of one meter's conditional <x> numerator at a terminal by whether
// the history pair passes through cut_path: both legs, neither leg, or
// exactly one (the interference cross term).
struct BranchDecomposition {
    double through = 0.0;
    double not_through = 0.0;
    double cross = 0.0;
    double total() const { return through + not_through + cross; }
};

BranchDecomposition branch_decomposition(const Circuit& c, const PathId& source,
                                         const PathId& terminal,
                                         const std::vector<MeterDevice>& devices,
                                         const std::string& meter_id, const PathId& cut_path);

// delta_m * Re(weak value of meter m's occupation projector).
double first_order_prediction(const Circuit& c, const PathId& source, const PathId& terminal,
                              const std::vector<MeterDevice>& devices,
                              const std::string& meter_id);

}  // namespace weakpointer
