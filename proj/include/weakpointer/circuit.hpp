#pragma once

#include "weakpointer/types.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace weakpointer {

// A path occupies a contiguous run of stage cuts [first_stage, last_stage].
struct PathSpan {
    PathId name;
    int first_stage = 0;
    int last_stage = 0;
};

// 2-mode unitary acting between stage `stage` and `stage + 1`:
// out_r = sum_c matrix(r, c) * in_c.
struct Coupler {
    int stage = 0;
    std::array<PathId, 2> in;
    std::array<PathId, 2> out;
    Mat2 matrix = Mat2::Identity();
};

// Identity continuation of one mode across a stage cut. Paths spanning both
// stages continue implicitly; an explicit entry is needed only when the mode
// changes name across the cut (e.g. G -> G_dump into a beam dump).
struct Passthrough {
    int stage = 0;
    PathId from;
    PathId to;
};

// Detector at (path, stage): the amplitude arriving at that cut is captured
// as a click probability and removed from the coherent evolution.
struct Absorber {
    PathId path;
    int stage = 0;
};

struct CircuitSpec {
    std::vector<std::string> stages;
    std::vector<PathSpan> paths;
    std::vector<Coupler> couplers;
    std::vector<Passthrough> passthroughs;
    PathId source;
    std::vector<PathId> terminals;
    std::vector<Absorber> absorbers;
};

// Validated lossless staged network. Construction is via build_circuit; every
// stage-to-stage map is square and unitary to kUnitaryTol (absorbers are the
// only norm sink, and only in terminated variants). Immutable after build.
class Circuit {
  public:
    const CircuitSpec& spec() const { return spec_; }
    int num_stages() const { return static_cast<int>(spec_.stages.size()); }
    int last_stage() const { return num_stages() - 1; }

    const std::string& stage_name(int k) const { return spec_.stages.at(k); }
    // Accepts a stage name; throws CircuitError if unknown.
    int stage_index(const std::string& name) const;

    // Paths present at stage k, in declaration order.
    const std::vector<PathId>& stage_paths(int k) const { return stage_paths_.at(k); }
    bool has_path_at(const PathId& p, int k) const;
    // Index of p within stage_paths(k); throws CircuitError if absent.
    int path_index(int k, const PathId& p) const;

    // Transfer matrix from stage k to k+1 (rows: paths at k+1, cols: at k).
    const Mat& transfer(int k) const { return transfers_.at(k); }

    // Indices (within stage_paths(k)) of absorbers sitting at stage k.
    const std::vector<int>& absorbers_at(int k) const { return absorbers_by_stage_.at(k); }
    bool has_absorbers() const { return !spec_.absorbers.empty(); }

    const PathId& source() const { return spec_.source; }
    const std::vector<PathId>& terminals() const { return spec_.terminals; }

    friend Circuit build_circuit(CircuitSpec spec);

  private:
    CircuitSpec spec_;
    std::vector<std::vector<PathId>> stage_paths_;
    std::vector<std::map<PathId, int>> index_at_stage_;
    std::vector<Mat> transfers_;
    std::vector<std::vector<int>> absorbers_by_stage_;
};

// Complex amplitude per path at each stage cut. Values at a cut are taken
// before any absorber at that same cut fires; downstream stages see the
// absorbed mode zeroed.
struct StageAmplitudes {
    std::vector<std::map<PathId, cplx>> stages;

    cplx at(int stage, const PathId& p) const;
    double norm_sq(int stage) const;
};

struct UnitaryReport {
    struct Entry {
        int stage = 0;
        std::string what;  // which coupler or stage map was checked
        double deviation = 0.0;
    };
    std::vector<Entry> entries;
    double max_deviation = 0.0;
};

// max |M^H M - I| over entries.
double unitarity_deviation(const Mat& m);

// Validates and finalizes a circuit description. Throws CircuitError on
// non-unitary couplers, dangling or duplicated paths, bad stage ranges.
Circuit build_circuit(CircuitSpec spec);

// Per-coupler and per-stage-map unitarity deviations (diagnostic; never throws).
UnitaryReport unitary_check(const Circuit& c);

// |psi1> propagated from `source` (amplitude 1 at stage 0).
StageAmplitudes forward_amplitudes(const Circuit& c, const PathId& source);

// Bra components of the post-selected state: value at (k, i) is
// <terminal| U(k -> end) |i>. Pairs with forward as sum_i back_i * fwd_i,
// which equals <psi2|psi1> at every stage.
StageAmplitudes backward_amplitudes(const Circuit& c, const PathId& terminal);

// Detection probability per port: declared terminals plus absorber clicks,
// accumulated by path name. Sums to 1 for a normalized source.
std::map<PathId, double> port_probabilities(const Circuit& c, const PathId& source);

// |forward amplitude|^2 at a cut (meter-free).
double internal_flux(const Circuit& c, const PathId& source, const PathId& path, int stage);

// New circuit with a detector at (path, stage); the click shows up as a port
// named after the path in port_probabilities.
Circuit terminate_at(const Circuit& c, const PathId& path, int stage);

// Port probabilities with the density matrix fully dephased in the
// {path, rest} basis at the given stage.
std::map<PathId, double> decohere_path(const Circuit& c, const PathId& path, int stage,
                                       const PathId& source);

// Flux at (probe_path, probe_stage) after dephasing at (dephased_path, dephase_stage).
double decohere_flux(const Circuit& c, const PathId& source,
                     const PathId& dephased_path, int dephase_stage,
                     const PathId& probe_path, int probe_stage);

}  // namespace weakpointer
