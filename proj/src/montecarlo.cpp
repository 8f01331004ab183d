#include "weakpointer/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "weakpointer/gaussian.hpp"

namespace weakpointer {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 flipped to (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t derive_substream(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Sampler::Sampler(const Circuit& c, const PathId& source,
                 const std::vector<MeterDevice>& devices)
    : devices_(devices) {
    const auto histories = enumerate_histories(c, source, devices_);

    std::vector<PathId> ports = c.terminals();
    for (const auto& ab : c.spec().absorbers)
        if (std::find(ports.begin(), ports.end(), ab.path) == ports.end())
            ports.push_back(ab.path);

    double cum = 0.0;
    for (const auto& port : ports) {
        PortHistories ph;
        for (const auto& h : histories) {
            if (h.terminal != port) continue;
            ph.amplitudes.push_back(h.amplitude);
            std::vector<double> s(devices_.size());
            for (size_t m = 0; m < devices_.size(); ++m) s[m] = h.shifts.at(devices_[m].id);
            ph.shifts.push_back(std::move(s));
            ph.weight_total += std::norm(h.amplitude);
            ph.weights.push_back(ph.weight_total);
        }

        // Exact port probability: the pairwise meter-overlap sum.
        double prob = 0.0;
        for (size_t a = 0; a < ph.amplitudes.size(); ++a)
            for (size_t b = 0; b < ph.amplitudes.size(); ++b) {
                double w = (std::conj(ph.amplitudes[a]) * ph.amplitudes[b]).real();
                for (size_t m = 0; m < devices_.size(); ++m)
                    w *= gaussian_overlap(ph.shifts[a][m], ph.shifts[b][m], devices_[m].sigma);
                prob += w;
            }

        cum += prob;
        ports_.push_back(port);
        cumulative_.push_back(cum);
        per_port_.push_back(std::move(ph));
    }
}

double Sampler::port_probability(const PathId& port) const {
    for (size_t i = 0; i < ports_.size(); ++i)
        if (ports_[i] == port)
            return cumulative_[i] - (i == 0 ? 0.0 : cumulative_[i - 1]);
    throw CircuitError("unknown terminal port '" + port + "'");
}

Event Sampler::sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    size_t port = 0;
    while (port + 1 < ports_.size() && u >= cumulative_[port]) ++port;
    const PortHistories& ph = per_port_[port];

    Event ev;
    ev.terminal = ports_[port];
    if (ph.amplitudes.empty())
        throw PostselectionError("sampled port '" + ev.terminal + "' has no histories");

    const double hcount = static_cast<double>(ph.amplitudes.size());
    std::vector<double> x(devices_.size());
    for (std::size_t attempt = 0; attempt < kMaxRejectionProposals; ++attempt) {
        // Propose from the classical mixture of per-history meter clouds.
        const double pick = rng.uniform() * ph.weight_total;
        const size_t h = std::lower_bound(ph.weights.begin(), ph.weights.end(), pick) -
                         ph.weights.begin();
        for (size_t m = 0; m < devices_.size(); ++m)
            x[m] = ph.shifts[h][m] + devices_[m].sigma * rng.normal();

        // |sum_h a_h prod_m G|^2 vs H * sum_h |a_h|^2 prod_m G^2.
        cplx coherent = 0.0;
        double envelope = 0.0;
        for (size_t g = 0; g < ph.amplitudes.size(); ++g) {
            double amp = 1.0;
            for (size_t m = 0; m < devices_.size(); ++m)
                amp *= gaussian_amplitude(x[m], ph.shifts[g][m], devices_[m].sigma);
            coherent += ph.amplitudes[g] * amp;
            envelope += std::norm(ph.amplitudes[g]) * amp * amp;
        }
        if (rng.uniform() * hcount * envelope <= std::norm(coherent)) {
            for (size_t m = 0; m < devices_.size(); ++m) ev.positions[devices_[m].id] = x[m];
            return ev;
        }
    }
    throw CircuitError("rejection sampling exceeded " +
                       std::to_string(kMaxRejectionProposals) +
                       " proposals; envelope bound violated");
}

Event sample_event(const Circuit& c, const PathId& source,
                   const std::vector<MeterDevice>& devices, Rng& rng) {
    return Sampler(c, source, devices).sample(rng);
}

WeakEstimate estimate_weak_value(const std::vector<Event>& events, const std::string& meter_id,
                                 double delta) {
    if (events.size() < 2)
        throw ConfigError("weak-value estimation needs at least 2 events at the terminal");
    if (delta == 0.0) throw ConfigError("weak-value estimation needs delta != 0");
    if (events.front().positions.count(meter_id) == 0)
        throw ConfigError("no meter '" + meter_id + "' in the sampled events");
    double sum = 0.0;
    for (const auto& ev : events) sum += ev.positions.at(meter_id);
    const double n = static_cast<double>(events.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& ev : events) {
        const double d = ev.positions.at(meter_id) - mean;
        ss += d * d;
    }
    const double sample_std = std::sqrt(ss / (n - 1.0));
    return {mean / delta, sample_std / (std::abs(delta) * std::sqrt(n))};
}

ResolutionBudget resolution_budget(const Circuit& c, const PathId& source,
                                   const PathId& terminal,
                                   const std::vector<MeterDevice>& devices,
                                   const std::string& meter_id, double k,
                                   const PathId& leak_path, int leak_stage) {
    const MeterDevice* dev = nullptr;
    for (const auto& d : devices)
        if (d.id == meter_id) dev = &d;
    if (!dev) throw ConfigError("unknown meter id '" + meter_id + "'");

    const double shift = first_order_prediction(c, source, terminal, devices, meter_id);
    if (shift == 0.0)
        throw ConfigError("first-order shift of meter '" + meter_id +
                          "' is zero; resolution budget undefined");

    ResolutionBudget b;
    b.k = k;
    b.delta = dev->delta;
    b.sigma = dev->sigma;
    const double ratio = k * dev->sigma / shift;
    b.n_postselected = static_cast<std::uint64_t>(std::ceil(ratio * ratio));

    const double p = pointer_report(c, source, terminal, devices).postselection_probability;
    b.m_emitted = static_cast<double>(b.n_postselected) / p;
    b.expected_leaked =
        b.m_emitted * flux_with_devices(c, source, leak_path, leak_stage, devices);
    return b;
}

}  // namespace weakpointer
