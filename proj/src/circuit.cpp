#include "weakpointer/circuit.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace weakpointer {

namespace {

std::string format_matrix(const Mat2& m) {
    std::ostringstream os;
    os << "[[" << m(0, 0) << ", " << m(0, 1) << "], [" << m(1, 0) << ", " << m(1, 1) << "]]";
    return os.str();
}

}  // namespace

double unitarity_deviation(const Mat& m) {
    return (m.adjoint() * m - Mat::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

int Circuit::stage_index(const std::string& name) const {
    for (int k = 0; k < num_stages(); ++k)
        if (spec_.stages[k] == name) return k;
    throw CircuitError("unknown stage '" + name + "'");
}

bool Circuit::has_path_at(const PathId& p, int k) const {
    if (k < 0 || k >= num_stages()) return false;
    return index_at_stage_[k].count(p) > 0;
}

int Circuit::path_index(int k, const PathId& p) const {
    if (k < 0 || k >= num_stages())
        throw CircuitError("stage index " + std::to_string(k) + " out of range");
    auto it = index_at_stage_[k].find(p);
    if (it == index_at_stage_[k].end())
        throw CircuitError("path '" + p + "' absent at stage " + std::to_string(k));
    return it->second;
}

cplx StageAmplitudes::at(int stage, const PathId& p) const {
    const auto& m = stages.at(stage);
    auto it = m.find(p);
    if (it == m.end())
        throw CircuitError("path '" + p + "' absent at stage " + std::to_string(stage));
    return it->second;
}

double StageAmplitudes::norm_sq(int stage) const {
    double s = 0.0;
    for (const auto& [name, a] : stages.at(stage)) s += std::norm(a);
    return s;
}

Circuit build_circuit(CircuitSpec spec) {
    const int n_stages = static_cast<int>(spec.stages.size());
    if (n_stages == 0) throw CircuitError("circuit has no stages");
    {
        std::set<std::string> seen;
        for (const auto& s : spec.stages)
            if (!seen.insert(s).second) throw CircuitError("duplicate stage name '" + s + "'");
    }
    if (spec.paths.empty()) throw CircuitError("circuit has no paths");

    std::map<PathId, const PathSpan*> by_name;
    for (const auto& p : spec.paths) {
        if (p.name.empty()) throw CircuitError("empty path name");
        if (!by_name.emplace(p.name, &p).second)
            throw CircuitError("duplicate path name '" + p.name + "'");
        if (p.first_stage < 0 || p.last_stage >= n_stages || p.first_stage > p.last_stage)
            throw CircuitError("path '" + p.name + "' has invalid stage range [" +
                               std::to_string(p.first_stage) + ", " +
                               std::to_string(p.last_stage) + "]");
    }

    auto span_of = [&](const PathId& name, const std::string& role) -> const PathSpan& {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw CircuitError("unknown path '" + name + "' referenced as " + role);
        return *it->second;
    };

    // consumed[k][name]: how the mode leaves stage k (coupler or passthrough).
    // produced[k][name]: how the mode arrives at stage k.
    std::vector<std::map<PathId, int>> consumed(n_stages), produced(n_stages);

    for (const auto& cp : spec.couplers) {
        if (cp.stage < 0 || cp.stage >= n_stages - 1)
            throw CircuitError("coupler stage " + std::to_string(cp.stage) + " out of range");
        if (cp.in[0] == cp.in[1] || cp.out[0] == cp.out[1])
            throw CircuitError("coupler at stage " + std::to_string(cp.stage) +
                               " reuses a path within a pair");
        const double dev = unitarity_deviation(cp.matrix);
        if (dev > kUnitaryTol)
            throw CircuitError("non-unitary coupler at stage " + std::to_string(cp.stage) +
                               " (" + cp.in[0] + "," + cp.in[1] + ")->(" + cp.out[0] + "," +
                               cp.out[1] + "): max |M^H M - I| = " + std::to_string(dev) +
                               ", matrix = " + format_matrix(cp.matrix));
        for (const auto& name : cp.in) {
            const auto& sp = span_of(name, "coupler input");
            if (sp.last_stage != cp.stage)
                throw CircuitError("coupler input '" + name + "' must end at stage " +
                                   std::to_string(cp.stage) + " but spans up to " +
                                   std::to_string(sp.last_stage));
            if (++consumed[cp.stage][name] > 1)
                throw CircuitError("path '" + name + "' consumed more than once at stage " +
                                   std::to_string(cp.stage));
        }
        for (const auto& name : cp.out) {
            const auto& sp = span_of(name, "coupler output");
            if (sp.first_stage != cp.stage + 1)
                throw CircuitError("coupler output '" + name + "' must start at stage " +
                                   std::to_string(cp.stage + 1));
            if (++produced[cp.stage + 1][name] > 1)
                throw CircuitError("path '" + name + "' produced more than once at stage " +
                                   std::to_string(cp.stage + 1));
        }
    }

    for (const auto& pt : spec.passthroughs) {
        if (pt.stage < 0 || pt.stage >= n_stages - 1)
            throw CircuitError("passthrough stage " + std::to_string(pt.stage) + " out of range");
        const auto& from = span_of(pt.from, "passthrough source");
        const auto& to = span_of(pt.to, "passthrough target");
        if (from.last_stage != pt.stage)
            throw CircuitError("passthrough source '" + pt.from + "' must end at stage " +
                               std::to_string(pt.stage));
        if (to.first_stage != pt.stage + 1)
            throw CircuitError("passthrough target '" + pt.to + "' must start at stage " +
                               std::to_string(pt.stage + 1));
        if (++consumed[pt.stage][pt.from] > 1)
            throw CircuitError("path '" + pt.from + "' consumed more than once at stage " +
                               std::to_string(pt.stage));
        if (++produced[pt.stage + 1][pt.to] > 1)
            throw CircuitError("path '" + pt.to + "' produced more than once at stage " +
                               std::to_string(pt.stage + 1));
    }

    // Every mode must flow: no dangling ends, nothing appearing from nowhere.
    for (const auto& p : spec.paths) {
        if (p.last_stage < n_stages - 1 && consumed[p.last_stage].count(p.name) == 0)
            throw CircuitError("dangling path '" + p.name + "': ends at stage " +
                               std::to_string(p.last_stage) + " without being consumed");
        if (p.first_stage > 0 && produced[p.first_stage].count(p.name) == 0)
            throw CircuitError("path '" + p.name + "' starts at stage " +
                               std::to_string(p.first_stage) +
                               " without a producing coupler or passthrough");
    }

    {
        const auto& sp = span_of(spec.source, "source port");
        if (sp.first_stage != 0)
            throw CircuitError("source port '" + spec.source + "' does not exist at stage 0");
    }
    {
        std::set<PathId> terms(spec.terminals.begin(), spec.terminals.end());
        if (terms.size() != spec.terminals.size())
            throw CircuitError("duplicate terminal port");
        for (const auto& t : spec.terminals) {
            const auto& sp = span_of(t, "terminal port");
            if (sp.last_stage != n_stages - 1)
                throw CircuitError("terminal port '" + t + "' does not reach the final stage");
        }
        for (const auto& p : spec.paths)
            if (p.last_stage == n_stages - 1 && terms.count(p.name) == 0)
                throw CircuitError("final-stage path '" + p.name +
                                   "' is not declared a terminal");
    }

    Circuit c;
    c.spec_ = std::move(spec);

    c.stage_paths_.resize(n_stages);
    c.index_at_stage_.resize(n_stages);
    for (const auto& p : c.spec_.paths)
        for (int k = p.first_stage; k <= p.last_stage; ++k) {
            c.index_at_stage_[k][p.name] = static_cast<int>(c.stage_paths_[k].size());
            c.stage_paths_[k].push_back(p.name);
        }

    c.transfers_.reserve(std::max(0, n_stages - 1));
    for (int k = 0; k + 1 < n_stages; ++k) {
        const auto& cur = c.stage_paths_[k];
        const auto& nxt = c.stage_paths_[k + 1];
        if (cur.size() != nxt.size())
            throw CircuitError("stage map " + std::to_string(k) + " -> " + std::to_string(k + 1) +
                               " is not square (" + std::to_string(cur.size()) + " vs " +
                               std::to_string(nxt.size()) + " modes)");
        Mat t = Mat::Zero(nxt.size(), cur.size());
        for (const auto& cp : c.spec_.couplers)
            if (cp.stage == k)
                for (int r = 0; r < 2; ++r)
                    for (int col = 0; col < 2; ++col)
                        t(c.index_at_stage_[k + 1].at(cp.out[r]),
                          c.index_at_stage_[k].at(cp.in[col])) = cp.matrix(r, col);
        for (const auto& pt : c.spec_.passthroughs)
            if (pt.stage == k)
                t(c.index_at_stage_[k + 1].at(pt.to), c.index_at_stage_[k].at(pt.from)) = 1.0;
        for (size_t i = 0; i < cur.size(); ++i)
            if (consumed[k].count(cur[i]) == 0)  // implicit same-name continuation
                t(c.index_at_stage_[k + 1].at(cur[i]), i) = 1.0;
        c.transfers_.push_back(std::move(t));
    }

    c.absorbers_by_stage_.resize(n_stages);
    for (const auto& ab : c.spec_.absorbers) {
        if (ab.stage < 0 || ab.stage >= n_stages)
            throw CircuitError("absorber stage " + std::to_string(ab.stage) + " out of range");
        if (!c.has_path_at(ab.path, ab.stage))
            throw CircuitError("absorber path '" + ab.path + "' absent at stage " +
                               std::to_string(ab.stage));
        c.absorbers_by_stage_[ab.stage].push_back(c.path_index(ab.stage, ab.path));
    }

    return c;
}

UnitaryReport unitary_check(const Circuit& c) {
    UnitaryReport rep;
    for (const auto& cp : c.spec().couplers) {
        const double dev = unitarity_deviation(cp.matrix);
        rep.entries.push_back({cp.stage,
                               "coupler (" + cp.in[0] + "," + cp.in[1] + ")->(" + cp.out[0] +
                                   "," + cp.out[1] + ")",
                               dev});
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    for (int k = 0; k + 1 < c.num_stages(); ++k) {
        const double dev = unitarity_deviation(c.transfer(k));
        rep.entries.push_back({k, "stage map " + std::to_string(k) + " -> " + std::to_string(k + 1), dev});
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    return rep;
}

namespace {

// Forward pass keeping absorber clicks separate from the coherent state.
// amps[k] holds the pre-absorption amplitudes at stage k.
struct ForwardPass {
    std::vector<Vec> amps;
    std::map<PathId, double> clicks;
};

ForwardPass run_forward(const Circuit& c, const PathId& source) {
    ForwardPass fp;
    Vec v = Vec::Zero(c.stage_paths(0).size());
    v[c.path_index(0, source)] = 1.0;
    for (int k = 0;; ++k) {
        fp.amps.push_back(v);
        for (int i : c.absorbers_at(k)) {
            fp.clicks[c.stage_paths(k)[i]] += std::norm(v[i]);
            v[i] = 0.0;
        }
        if (k == c.last_stage()) break;
        v = c.transfer(k) * v;
    }
    return fp;
}

}  // namespace

StageAmplitudes forward_amplitudes(const Circuit& c, const PathId& source) {
    ForwardPass fp = run_forward(c, source);
    StageAmplitudes out;
    out.stages.resize(c.num_stages());
    for (int k = 0; k < c.num_stages(); ++k) {
        const auto& names = c.stage_paths(k);
        for (size_t i = 0; i < names.size(); ++i) out.stages[k][names[i]] = fp.amps[k][i];
    }
    return out;
}

StageAmplitudes backward_amplitudes(const Circuit& c, const PathId& terminal) {
    if (std::find(c.terminals().begin(), c.terminals().end(), terminal) == c.terminals().end())
        throw CircuitError("unknown terminal port '" + terminal + "'");

    const int last = c.last_stage();
    Eigen::RowVectorXcd b = Eigen::RowVectorXcd::Zero(c.stage_paths(last).size());
    b[c.path_index(last, terminal)] = 1.0;

    StageAmplitudes out;
    out.stages.resize(c.num_stages());
    for (int k = last;; --k) {
        Eigen::RowVectorXcd masked = b;
        for (int i : c.absorbers_at(k)) masked[i] = 0.0;
        const auto& names = c.stage_paths(k);
        // Store pre-absorption pairing values only when the terminal itself is
        // the absorbed port at the final cut; everywhere else the absorbed
        // mode never reaches the terminal.
        for (size_t i = 0; i < names.size(); ++i) out.stages[k][names[i]] = masked[i];
        if (k == last) out.stages[k][terminal] = b[c.path_index(last, terminal)];
        if (k == 0) break;
        b = masked * c.transfer(k - 1);
    }
    return out;
}

std::map<PathId, double> port_probabilities(const Circuit& c, const PathId& source) {
    ForwardPass fp = run_forward(c, source);
    std::map<PathId, double> probs = fp.clicks;
    const int last = c.last_stage();
    Vec final_amp = fp.amps[last];
    for (int i : c.absorbers_at(last)) final_amp[i] = 0.0;
    for (const auto& t : c.terminals()) probs[t] += std::norm(final_amp[c.path_index(last, t)]);
    return probs;
}

double internal_flux(const Circuit& c, const PathId& source, const PathId& path, int stage) {
    const int i = c.path_index(stage, path);
    ForwardPass fp = run_forward(c, source);
    return std::norm(fp.amps[stage][i]);
}

Circuit terminate_at(const Circuit& c, const PathId& path, int stage) {
    if (!c.has_path_at(path, stage))
        throw CircuitError("path '" + path + "' absent at stage " + std::to_string(stage));
    CircuitSpec spec = c.spec();
    for (const auto& ab : spec.absorbers)
        if (ab.path == path && ab.stage == stage) return build_circuit(std::move(spec));
    spec.absorbers.push_back({path, stage});
    return build_circuit(std::move(spec));
}

namespace {

// Density-matrix pass: diag entries give fluxes, dephasing zeroes the
// off-diagonal block between one mode and the rest.
struct DensityPass {
    std::vector<Eigen::VectorXd> diag;  // pre-absorption, per stage
    std::map<PathId, double> clicks;
    Mat final_rho;
};

DensityPass run_density(const Circuit& c, const PathId& source, const PathId& dephased,
                        int dephase_stage) {
    if (!c.has_path_at(dephased, dephase_stage))
        throw CircuitError("path '" + dephased + "' absent at stage " +
                           std::to_string(dephase_stage));
    DensityPass dp;
    const int n0 = static_cast<int>(c.stage_paths(0).size());
    Mat rho = Mat::Zero(n0, n0);
    rho(c.path_index(0, source), c.path_index(0, source)) = 1.0;
    for (int k = 0;; ++k) {
        dp.diag.push_back(rho.diagonal().real());
        for (int i : c.absorbers_at(k)) {
            dp.clicks[c.stage_paths(k)[i]] += rho(i, i).real();
            rho.row(i).setZero();
            rho.col(i).setZero();
        }
        if (k == dephase_stage) {
            const int i = c.path_index(k, dephased);
            for (int j = 0; j < rho.rows(); ++j)
                if (j != i) {
                    rho(i, j) = 0.0;
                    rho(j, i) = 0.0;
                }
        }
        if (k == c.last_stage()) break;
        rho = c.transfer(k) * rho * c.transfer(k).adjoint();
    }
    dp.final_rho = std::move(rho);
    return dp;
}

}  // namespace

std::map<PathId, double> decohere_path(const Circuit& c, const PathId& path, int stage,
                                       const PathId& source) {
    DensityPass dp = run_density(c, source, path, stage);
    std::map<PathId, double> probs = dp.clicks;
    const int last = c.last_stage();
    for (const auto& t : c.terminals())
        probs[t] += dp.final_rho(c.path_index(last, t), c.path_index(last, t)).real();
    return probs;
}

double decohere_flux(const Circuit& c, const PathId& source, const PathId& dephased_path,
                     int dephase_stage, const PathId& probe_path, int probe_stage) {
    const int i = c.path_index(probe_stage, probe_path);
    DensityPass dp = run_density(c, source, dephased_path, dephase_stage);
    return dp.diag[probe_stage][i];
}

}  // namespace weakpointer
