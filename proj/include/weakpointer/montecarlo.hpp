#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "weakpointer/circuit.hpp"
#include "weakpointer/pointer.hpp"
#include "weakpointer/types.hpp"

namespace weakpointer {

// Deterministic stream: mt19937_64 with explicit output mappings, so runs
// are bit-reproducible across standard libraries (std::normal_distribution
// is implementation-defined; the Box-Muller here is not).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal();

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Independent substream seed for shard `index` (splitmix64 of seed + index).
std::uint64_t derive_substream(std::uint64_t seed, std::uint64_t index);

struct Event {
    PathId terminal;
    std::map<std::string, double> positions;  // by device id
};

// Samples detection events from the exact joint distribution: the terminal
// from the exact port probabilities, then meter positions by rejection
// against the mixture envelope H * sum_h |a_h|^2 prod_m |G_{s_hm}|^2.
class Sampler {
  public:
    Sampler(const Circuit& c, const PathId& source, const std::vector<MeterDevice>& devices);

    Event sample(Rng& rng) const;

    const std::vector<PathId>& ports() const { return ports_; }
    double port_probability(const PathId& port) const;

  private:
    struct PortHistories {
        std::vector<cplx> amplitudes;
        std::vector<std::vector<double>> shifts;  // aligned with devices_
        std::vector<double> weights;              // cumulative |a_h|^2
        double weight_total = 0.0;
    };

    std::vector<MeterDevice> devices_;
    std::vector<PathId> ports_;
    std::vector<double> cumulative_;
    std::vector<PortHistories> per_port_;
};

Event sample_event(const Circuit& c, const PathId& source,
                   const std::vector<MeterDevice>& devices, Rng& rng);

struct WeakEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

// Sample mean / delta over events already filtered to one terminal.
// Needs at least 2 events and delta != 0.
WeakEstimate estimate_weak_value(const std::vector<Event>& events, const std::string& meter_id,
                                 double delta);

struct ResolutionBudget {
    double k = 0.0;
    double delta = 0.0;
    double sigma = 0.0;
    std::uint64_t n_postselected = 0;
    double m_emitted = 0.0;
    double expected_leaked = 0.0;
};

// Repetitions needed to resolve meter_id's first-order shift to k standard
// errors (conditional std approximated by sigma), and the expected number of
// photons crossing (leak_path, leak_stage) over the whole ensemble.
ResolutionBudget resolution_budget(const Circuit& c, const PathId& source,
                                   const PathId& terminal,
                                   const std::vector<MeterDevice>& devices,
                                   const std::string& meter_id, double k,
                                   const PathId& leak_path, int leak_stage);

}  // namespace weakpointer
