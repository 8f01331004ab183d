#include "weakpointer/pointer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "weakpointer/gaussian.hpp"
#include "weakpointer/tsvf.hpp"

namespace weakpointer {

void validate_devices(const Circuit& c, const std::vector<MeterDevice>& devices) {
    std::set<std::string> ids;
    for (const auto& d : devices) {
        if (d.id.empty()) throw ConfigError("device with empty id");
        if (!ids.insert(d.id).second) throw ConfigError("duplicate device id '" + d.id + "'");
        if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
            throw ConfigError("device '" + d.id + "' needs sigma > 0");
        if (!std::isfinite(d.delta))
            throw ConfigError("device '" + d.id + "' has non-finite delta");
        if (!c.has_path_at(d.path, d.stage))
            throw ConfigError("device '" + d.id + "' sits on path '" + d.path +
                              "' which is absent at stage " + std::to_string(d.stage));
    }
}

namespace {

// Depth-first walk over trajectories. Shifts are carried as a vector aligned
// with the device list and converted to the id-keyed map on emission.
struct HistoryWalk {
    const Circuit& c;
    const std::vector<MeterDevice>& devices;
    int cut;
    bool keep_absorbed;

    std::vector<History> out;
    std::vector<PathId> trace;
    std::vector<double> shifts;

    HistoryWalk(const Circuit& c_, const std::vector<MeterDevice>& devices_, int cut_,
                bool keep_absorbed_)
        : c(c_), devices(devices_), cut(cut_), keep_absorbed(keep_absorbed_) {
        shifts.assign(devices.size(), 0.0);
    }

    void emit(const PathId& terminal, cplx amp) {
        if (out.size() >= kMaxHistories)
            throw CircuitError("history enumeration exceeded " +
                               std::to_string(kMaxHistories) + " trajectories");
        History h;
        h.terminal = terminal;
        h.amplitude = amp;
        for (size_t m = 0; m < devices.size(); ++m) h.shifts[devices[m].id] = shifts[m];
        h.trace = trace;
        out.push_back(std::move(h));
    }

    void run(int k, int i, cplx amp) {
        const PathId& p = c.stage_paths(k)[i];
        trace.push_back(p);
        std::vector<size_t> touched;
        for (size_t m = 0; m < devices.size(); ++m)
            if (devices[m].stage == k && devices[m].path == p) {
                shifts[m] += devices[m].delta;
                touched.push_back(m);
            }

        const auto& abs_here = c.absorbers_at(k);
        const bool absorbed = std::find(abs_here.begin(), abs_here.end(), i) != abs_here.end();
        if (k == cut) {
            emit(p, amp);
        } else if (absorbed) {
            if (keep_absorbed) emit(p, amp);
        } else {
            const Mat& t = c.transfer(k);
            for (int j = 0; j < t.rows(); ++j)
                if (t(j, i) != cplx(0.0)) run(k + 1, j, amp * t(j, i));
        }

        for (size_t m : touched) shifts[m] -= devices[m].delta;
        trace.pop_back();
    }
};

std::vector<History> walk(const Circuit& c, const PathId& source,
                          const std::vector<MeterDevice>& devices, int cut,
                          bool keep_absorbed) {
    validate_devices(c, devices);
    HistoryWalk w(c, devices, cut, keep_absorbed);
    w.run(0, c.path_index(0, source), 1.0);
    return std::move(w.out);
}

double overlap_product(const History& a, const History& b,
                       const std::vector<MeterDevice>& devices, int skip = -1) {
    double w = 1.0;
    for (size_t m = 0; m < devices.size(); ++m) {
        if (static_cast<int>(m) == skip) continue;
        w *= gaussian_overlap(a.shifts.at(devices[m].id), b.shifts.at(devices[m].id),
                              devices[m].sigma);
    }
    return w;
}

// P = sum_{h,h'} conj(a_h) a_h' prod_m <G_{s_hm}|G_{s_h'm}>.
double joint_probability(const std::vector<const History*>& hs,
                         const std::vector<MeterDevice>& devices) {
    cplx p = 0.0;
    for (const History* a : hs)
        for (const History* b : hs)
            p += std::conj(a->amplitude) * b->amplitude * overlap_product(*a, *b, devices);
    return p.real();
}

// Unnormalized <x_m>: the x moment replaces meter m's overlap factor.
double mean_numerator(const std::vector<const History*>& hs,
                      const std::vector<MeterDevice>& devices, int m) {
    cplx s = 0.0;
    for (const History* a : hs)
        for (const History* b : hs)
            s += std::conj(a->amplitude) * b->amplitude *
                 gaussian_x_moment(a->shifts.at(devices[m].id), b->shifts.at(devices[m].id),
                                   devices[m].sigma) *
                 overlap_product(*a, *b, devices, m);
    return s.real();
}

std::vector<const History*> at_terminal(const std::vector<History>& hs, const PathId& t) {
    std::vector<const History*> out;
    for (const auto& h : hs)
        if (h.terminal == t) out.push_back(&h);
    return out;
}

// Declared terminals first, then absorber ports in declaration order.
std::vector<PathId> detection_ports(const Circuit& c) {
    std::vector<PathId> ports = c.terminals();
    for (const auto& ab : c.spec().absorbers)
        if (std::find(ports.begin(), ports.end(), ab.path) == ports.end())
            ports.push_back(ab.path);
    return ports;
}

PointerReport report_for(const std::vector<History>& all, const PathId& terminal,
                         const std::vector<MeterDevice>& devices) {
    PointerReport r;
    r.terminal = terminal;
    const auto hs = at_terminal(all, terminal);
    r.postselection_probability = joint_probability(hs, devices);
    if (r.postselection_probability < kPostselectionTol) return r;
    for (size_t m = 0; m < devices.size(); ++m) {
        const double mean =
            mean_numerator(hs, devices, static_cast<int>(m)) / r.postselection_probability;
        r.means[devices[m].id] = mean;
        if (devices[m].delta != 0.0) r.weak_estimates[devices[m].id] = mean / devices[m].delta;
    }
    return r;
}

}  // namespace

std::vector<History> enumerate_histories(const Circuit& c, const PathId& source,
                                         const std::vector<MeterDevice>& devices) {
    return walk(c, source, devices, c.last_stage(), true);
}

std::vector<History> partial_histories(const Circuit& c, const PathId& source,
                                       const std::vector<MeterDevice>& devices, int stage) {
    if (stage < 0 || stage >= c.num_stages())
        throw CircuitError("stage index " + std::to_string(stage) + " out of range");
    return walk(c, source, devices, stage, false);
}

PointerReport pointer_report(const Circuit& c, const PathId& source, const PathId& terminal,
                             const std::vector<MeterDevice>& devices) {
    const auto ports = detection_ports(c);
    if (std::find(ports.begin(), ports.end(), terminal) == ports.end())
        throw CircuitError("unknown terminal port '" + terminal + "'");
    const auto all = enumerate_histories(c, source, devices);
    PointerReport r = report_for(all, terminal, devices);
    if (r.postselection_probability < kPostselectionTol)
        throw PostselectionError("vanishing post-selection probability at port '" + terminal +
                                 "'");
    return r;
}

std::vector<PointerReport> all_pointer_reports(const Circuit& c, const PathId& source,
                                               const std::vector<MeterDevice>& devices) {
    const auto all = enumerate_histories(c, source, devices);
    std::vector<PointerReport> out;
    for (const auto& port : detection_ports(c)) out.push_back(report_for(all, port, devices));
    return out;
}

double flux_with_devices(const Circuit& c, const PathId& source, const PathId& path, int stage,
                         const std::vector<MeterDevice>& devices) {
    c.path_index(stage, path);  // existence check
    const auto partial = partial_histories(c, source, devices, stage);
    std::vector<const History*> hs;
    for (const auto& h : partial)
        if (h.trace.back() == path) hs.push_back(&h);
    return joint_probability(hs, devices);
}

BranchDecomposition branch_decomposition(const Circuit& c, const PathId& source,
                                         const PathId& terminal,
                                         const std::vector<MeterDevice>& devices,
                                         const std::string& meter_id, const PathId& cut_path) {
    int m = -1;
    for (size_t i = 0; i < devices.size(); ++i)
        if (devices[i].id == meter_id) m = static_cast<int>(i);
    if (m < 0) throw ConfigError("unknown meter id '" + meter_id + "'");

    const auto all = enumerate_histories(c, source, devices);
    const auto hs = at_terminal(all, terminal);
    auto passes = [&](const History* h) {
        return std::find(h->trace.begin(), h->trace.end(), cut_path) != h->trace.end();
    };

    BranchDecomposition d;
    for (const History* a : hs)
        for (const History* b : hs) {
            const double term =
                (std::conj(a->amplitude) * b->amplitude).real() *
                gaussian_x_moment(a->shifts.at(devices[m].id), b->shifts.at(devices[m].id),
                                  devices[m].sigma) *
                overlap_product(*a, *b, devices, m);
            const bool pa = passes(a), pb = passes(b);
            if (pa && pb)
                d.through += term;
            else if (!pa && !pb)
                d.not_through += term;
            else
                d.cross += term;
        }
    return d;
}

double first_order_prediction(const Circuit& c, const PathId& source, const PathId& terminal,
                              const std::vector<MeterDevice>& devices,
                              const std::string& meter_id) {
    for (const auto& d : devices)
        if (d.id == meter_id)
            return d.delta *
                   weak_value(c, source, terminal, path_projector(d.path, d.stage)).real();
    throw ConfigError("unknown meter id '" + meter_id + "'");
}

}  // namespace weakpointer
