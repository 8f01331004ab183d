#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakpointer/circuit_json.hpp"
#include "weakpointer/montecarlo.hpp"
#include "weakpointer/oracle.hpp"
#include "weakpointer/pointer.hpp"
#include "weakpointer/scenarios.hpp"
#include "weakpointer/serialize.hpp"
#include "weakpointer/tsvf.hpp"

namespace wp = weakpointer;

namespace {

wp::Circuit load_circuit_arg(const std::string& arg) {
    if (arg == "canonical") return wp::canonical_network();
    if (!arg.empty() && arg.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(arg);
        } catch (const nlohmann::json::parse_error& e) {
            throw wp::ConfigError(std::string("inline circuit JSON: ") + e.what());
        }
        return wp::circuit_from_json(j);
    }
    return wp::load_circuit_file(arg);
}

std::vector<wp::MeterDevice> load_devices_arg(const std::string& arg) {
    if (arg.empty()) return {};
    if (arg.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(arg);
        } catch (const nlohmann::json::parse_error& e) {
            throw wp::ConfigError(std::string("inline devices JSON: ") + e.what());
        }
        return wp::devices_from_json(j);
    }
    return wp::load_devices_file(arg);
}

int parse_stage_arg(const wp::Circuit& c, const std::string& arg) {
    try {
        size_t pos = 0;
        const int k = std::stoi(arg, &pos);
        if (pos == arg.size()) {
            if (k < 0 || k >= c.num_stages())
                throw wp::ConfigError("stage index " + arg + " out of range");
            return k;
        }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
        throw wp::ConfigError("stage index " + arg + " out of range");
    }
    return c.stage_index(arg);
}

int run_weakvalues(const std::string& circuit_arg, const std::string& from,
                   const std::string& to, const std::string& stage_arg) {
    const wp::Circuit c = load_circuit_arg(circuit_arg);
    const wp::PathId source = from.empty() ? c.source() : from;
    const wp::PathId terminal = to.empty() ? c.terminals().front() : to;

    std::vector<int> stages;
    if (stage_arg.empty())
        for (int k = 0; k < c.num_stages(); ++k) stages.push_back(k);
    else
        stages.push_back(parse_stage_arg(c, stage_arg));

    std::cout << "stage,path,weak_re,weak_im\n";
    for (int k : stages) {
        const wp::WeakValueTable t = wp::weak_probability_table(c, source, terminal, k);
        for (const auto& p : c.stage_paths(k)) {
            const wp::cplx v = t.values.at(p);
            std::cout << c.stage_name(k) << "," << p << "," << wp::format_double(v.real())
                      << "," << wp::format_double(v.imag()) << "\n";
        }
        std::cout << c.stage_name(k) << ",sum," << wp::format_double(t.sum.real()) << ","
                  << wp::format_double(t.sum.imag()) << "\n";
    }
    return 0;
}

int run_simulate(const std::string& circuit_arg, const std::string& devices_arg,
                 const std::string& terminal, bool oracle, int points, double half_width,
                 const std::string& format) {
    const wp::Circuit c = load_circuit_arg(circuit_arg);
    std::vector<wp::MeterDevice> devices = load_devices_arg(devices_arg);
    wp::validate_devices(c, devices);

    std::optional<wp::GridResult> grid;
    if (oracle) {
        // Compare both engines at deltas the grid can represent exactly:
        // sub-cell displacements are promoted to one cell, the rest snap.
        for (auto& d : devices) {
            const double h = 2.0 * half_width * d.sigma / static_cast<double>(points);
            if (d.delta != 0.0 && std::abs(d.delta) < h) d.delta = std::copysign(h, d.delta);
        }
        grid = wp::grid_simulate(c, c.source(), devices, wp::GridSpec{half_width, points});
        for (auto& d : devices) d.delta = grid->snapped_deltas.at(d.id);
    }

    std::vector<wp::PointerReport> reports = wp::all_pointer_reports(c, c.source(), devices);
    if (!terminal.empty()) {
        std::vector<wp::PointerReport> one;
        for (auto& r : reports)
            if (r.terminal == terminal) one.push_back(std::move(r));
        if (one.empty()) throw wp::ConfigError("unknown terminal port '" + terminal + "'");
        if (one.front().postselection_probability < wp::kPostselectionTol)
            throw wp::PostselectionError("vanishing post-selection probability at port '" +
                                         terminal + "'");
        reports = std::move(one);
    }

    double max_disc = 0.0;
    if (grid) {
        for (const auto& r : reports) {
            const auto& g = grid->ports.at(r.terminal);
            max_disc = std::max(max_disc,
                                std::abs(r.postselection_probability - g.probability));
            for (const auto& [id, mean] : r.means)
                if (g.means.count(id))
                    max_disc = std::max(max_disc, std::abs(mean - g.means.at(id)));
        }
    }

    if (format == "json") {
        nlohmann::ordered_json out;
        out["ports"] = nlohmann::ordered_json::array();
        for (const auto& r : reports) {
            nlohmann::ordered_json jr;
            jr["terminal"] = r.terminal;
            jr["probability"] = r.postselection_probability;
            jr["means"] = r.means;
            jr["weak_estimates"] = r.weak_estimates;
            if (grid) {
                const auto& g = grid->ports.at(r.terminal);
                jr["oracle"] = {{"probability", g.probability},
                                {"means", g.means},
                                {"variances", g.variances}};
            }
            out["ports"].push_back(std::move(jr));
        }
        if (grid) {
            out["snapped_deltas"] = grid->snapped_deltas;
            out["max_discrepancy"] = max_disc;
        }
        std::cout << out.dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "terminal,probability,device,delta,mean,weak_estimate"
                  << (grid ? ",oracle_probability,oracle_mean" : "") << "\n";
        for (const auto& r : reports) {
            auto emit = [&](const std::string& id, const std::string& delta,
                            const std::string& mean, const std::string& est) {
                std::cout << r.terminal << "," << wp::format_double(r.postselection_probability)
                          << "," << id << "," << delta << "," << mean << "," << est;
                if (grid) {
                    const auto& g = grid->ports.at(r.terminal);
                    std::cout << "," << wp::format_double(g.probability) << ",";
                    if (!id.empty() && g.means.count(id))
                        std::cout << wp::format_double(g.means.at(id));
                }
                std::cout << "\n";
            };
            if (devices.empty()) {
                emit("", "", "", "");
                continue;
            }
            for (const auto& d : devices) {
                const bool have = r.means.count(d.id) > 0;
                emit(d.id, wp::format_double(d.delta),
                     have ? wp::format_double(r.means.at(d.id)) : "",
                     r.weak_estimates.count(d.id)
                         ? wp::format_double(r.weak_estimates.at(d.id))
                         : "");
            }
        }
    } else {
        throw wp::ConfigError("unknown format '" + format + "' (expected csv or json)");
    }

    if (grid && max_disc > 1e-6) {
        std::cerr << "oracle disagreement: max discrepancy " << wp::format_double(max_disc)
                  << " exceeds 1e-6\n";
        return 3;
    }
    return 0;
}

int run_scan(const std::string& scenario, const std::vector<double>& deltas,
             const std::vector<double>& deltas_f, double sigma, double k,
             std::optional<std::uint64_t> seed) {
    wp::ScenarioParams params;
    params.delta_b = deltas;
    params.delta_f = deltas_f;
    params.sigma = sigma;
    params.k = k;
    if (!seed)
        if (const char* env = std::getenv("WEAKPOINTER_SEED")) seed = std::stoull(env);
    params.seed = seed;

    const std::vector<wp::ScanRow> rows = wp::run_scenario(scenario, params);
    std::cout << wp::csv_header() << "\n";
    for (const auto& row : rows) std::cout << wp::csv_row(row) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak measurements in pre/post-selected interferometer networks"};
    app.require_subcommand(1);

    std::string circuit_arg = "canonical";
    std::string devices_arg, from_arg, to_arg, stage_arg, terminal_arg;
    std::string format = "csv";
    bool oracle = false;
    int points = 4096;
    double half_width = 8.0;
    std::string scenario;
    std::vector<double> deltas, deltas_f;
    double sigma = 1.0, k = 5.0;
    std::optional<std::uint64_t> seed;

    auto* wv = app.add_subcommand("weakvalues",
                                  "weak values of every path projector at a stage cut");
    wv->add_option("--circuit", circuit_arg, "'canonical', a JSON file, or inline JSON");
    wv->add_option("--from", from_arg, "source port (default: circuit source)");
    wv->add_option("--to", to_arg, "post-selected port (default: first terminal)");
    wv->add_option("--stage", stage_arg, "stage name or index (default: all stages)");

    auto* sim = app.add_subcommand("simulate", "exact pointer readout per detection port");
    sim->add_option("--circuit", circuit_arg, "'canonical', a JSON file, or inline JSON");
    sim->add_option("--devices", devices_arg, "devices JSON file or inline JSON");
    sim->add_option("--terminal", terminal_arg, "restrict to one port (default: all)");
    sim->add_flag("--oracle", oracle,
                  "cross-check on the grid oracle (snaps deltas to the grid)");
    sim->add_option("--points", points, "oracle grid points per meter axis");
    sim->add_option("--half-width", half_width, "oracle grid half-width in sigmas");
    sim->add_option("--format", format, "csv or json");

    std::string scenario_help = "one of:";
    for (const auto& n : wp::scenario_names()) scenario_help += " " + n;
    auto* scan = app.add_subcommand("scan", "run a named scenario grid, CSV to stdout");
    scan->add_option("--scenario", scenario, scenario_help)->required();
    scan->add_option("--delta", deltas, "delta_B values (comma separated)")->delimiter(',');
    scan->add_option("--delta-f", deltas_f, "delta_F values (comma separated)")
        ->delimiter(',');
    scan->add_option("--sigma", sigma, "meter width");
    scan->add_option("--k", k, "resolution significance in standard errors");
    scan->add_option("--seed", seed, "RNG seed (fallback: WEAKPOINTER_SEED)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*wv) return run_weakvalues(circuit_arg, from_arg, to_arg, stage_arg);
        if (*sim)
            return run_simulate(circuit_arg, devices_arg, terminal_arg, oracle, points,
                                half_width, format);
        return run_scan(scenario, deltas, deltas_f, sigma, k, seed);
    } catch (const wp::ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n"
                  << wp::csv_header() << "\n"
                  << wp::csv_row(e.row) << "\n";
        return 4;
    } catch (const wp::PostselectionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
