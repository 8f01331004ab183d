#include "weakpointer/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "weakpointer/fit.hpp"
#include "weakpointer/montecarlo.hpp"
#include "weakpointer/pointer.hpp"
#include "weakpointer/serialize.hpp"
#include "weakpointer/tsvf.hpp"

namespace weakpointer {

Circuit canonical_network() {
    const double a = 1.0 / std::sqrt(3.0);  // outer split: |A|^2 = 1/3
    const double b = std::sqrt(2.0 / 3.0);
    const double r = 1.0 / std::sqrt(2.0);  // balanced inner couplers

    CircuitSpec spec;
    spec.stages = {"src", "AE", "ABC", "AFG", "out"};
    spec.paths = {
        {"in", 0, 0}, {"w0", 0, 0}, {"w1", 0, 1},  // w0/w1: unused vacuum ports
        {"A", 1, 3},  {"E", 1, 1},  {"B", 2, 2},   {"C", 2, 2},
        {"F", 3, 3},  {"G", 3, 3},  {"G_dump", 4, 4}, {"D", 4, 4}, {"D'", 4, 4},
    };
    Mat2 outer_in, inner_split, inner_merge, outer_out;
    outer_in << a, -b, b, a;
    // E -> (B - C)/sqrt(2): makes F = (B + C)/sqrt(2) the dark output.
    inner_split << r, r, -r, r;
    inner_merge << r, r, r, -r;
    outer_out << a, b, -b, a;
    spec.couplers = {
        {0, {"in", "w0"}, {"A", "E"}, outer_in},
        {1, {"E", "w1"}, {"B", "C"}, inner_split},
        {2, {"B", "C"}, {"F", "G"}, inner_merge},
        {3, {"A", "F"}, {"D", "D'"}, outer_out},
    };
    spec.passthroughs = {{3, "G", "G_dump"}};
    spec.source = "in";
    spec.terminals = {"D", "D'", "G_dump"};
    return build_circuit(std::move(spec));
}

namespace {

std::string csv_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

constexpr double kNinth = 1.0 / 9.0;

MeterDevice device_b(double delta, double sigma) { return {"B", "B", 2, delta, sigma}; }
MeterDevice device_f(double delta, double sigma) { return {"F", "F", 3, delta, sigma}; }

void check(bool ok, const std::string& what, const ScanRow& row) {
    if (!ok) throw ScenarioError("scenario " + row.scenario + ": " + what, row);
}

std::vector<ScanRow> baseline_counterfactual(const Circuit& c, const ScenarioParams& p) {
    ScanRow row;
    row.scenario = "baseline_counterfactual";
    row.sigma = p.sigma;
    row.seed = p.seed;
    row.p_d = port_probabilities(c, c.source()).at("D");
    row.p_f_flux = internal_flux(c, c.source(), "F", 3);
    check(std::abs(*row.p_f_flux) <= 1e-12, "F flux not 0", row);
    check(std::abs(*row.p_d - kNinth) <= 1e-12, "P(D) not 1/9", row);
    const Circuit detected = terminate_at(c, "F", 3);
    const double f_click = port_probabilities(detected, c.source()).at("F");
    check(std::abs(f_click) <= 1e-12, "detector at F clicks", row);
    return {row};
}

std::vector<ScanRow> weak_b_scan(const Circuit& c, const ScenarioParams& p) {
    std::vector<double> deltas = p.delta_b;
    if (deltas.empty()) deltas = {0.2 * p.sigma, 0.1 * p.sigma, 0.05 * p.sigma, 0.025 * p.sigma};

    std::vector<ScanRow> rows;
    for (double delta : deltas) {
        const std::vector<MeterDevice> devs = {device_b(delta, p.sigma)};
        ScanRow row;
        row.scenario = "weak_b_scan";
        row.delta_b = delta;
        row.sigma = p.sigma;
        row.seed = p.seed;

        const PointerReport rep = pointer_report(c, c.source(), "D", devs);
        row.p_d = rep.postselection_probability;
        row.wb_est = rep.weak_estimates.at("B");
        row.wb_first = first_order_prediction(c, c.source(), "D", devs, "B") / delta;
        row.p_f_flux = flux_with_devices(c, c.source(), "F", 3, devs);

        const double u = std::exp(-delta * delta / (8.0 * p.sigma * p.sigma));
        check(std::abs(*row.p_d - kNinth) <= 1e-12, "P(D) not 1/9", row);
        check(std::abs(rep.means.at("B") - delta) <= 1e-12, "D-conditional mean not delta", row);
        check(std::abs(*row.p_f_flux - (1.0 - u) / 3.0) <= 1e-9, "F flux off closed form", row);

        const BranchDecomposition bd =
            branch_decomposition(c, c.source(), "D", devs, "B", "F");
        check(std::abs(bd.total() - rep.means.at("B") * *row.p_d) <= 1e-12,
              "branch decomposition does not sum to the numerator", row);
        check(std::abs(bd.not_through) <= 1e-12,
              "shift numerator has a term avoiding the leak path", row);

        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ScanRow> bf_simultaneous(const Circuit& c, const ScenarioParams& p) {
    std::vector<double> dbs = p.delta_b;
    if (dbs.empty()) dbs = {1.0 * p.sigma, 0.2 * p.sigma, 0.1 * p.sigma, 0.05 * p.sigma};
    std::vector<double> dfs = p.delta_f;
    if (dfs.empty()) dfs = {0.01 * p.sigma, 0.001 * p.sigma};

    std::vector<ScanRow> rows;
    for (double db : dbs)
        for (double df : dfs) {
            const std::vector<MeterDevice> devs = {device_b(db, p.sigma),
                                                   device_f(df, p.sigma)};
            ScanRow row;
            row.scenario = "bf_simultaneous";
            row.delta_b = db;
            row.delta_f = df;
            row.sigma = p.sigma;
            row.seed = p.seed;

            const PointerReport rep = pointer_report(c, c.source(), "D", devs);
            row.p_d = rep.postselection_probability;
            row.wb_est = rep.weak_estimates.at("B");
            row.wf_est = rep.weak_estimates.at("F");
            row.wb_first = first_order_prediction(c, c.source(), "D", devs, "B") / db;
            row.wf_first = first_order_prediction(c, c.source(), "D", devs, "F") / df;
            row.p_f_flux = flux_with_devices(c, c.source(), "F", 3, devs);

            const double s8 = 8.0 * p.sigma * p.sigma;
            const double u = std::exp(-db * db / s8), v = std::exp(-df * df / s8);
            const double denom = 3.0 - 2.0 * u - 2.0 * v + 2.0 * u * v;
            check(std::abs(*row.p_d - denom / 9.0) <= 1e-12, "P(D) off closed form", row);
            check(std::abs(*row.wf_est - (1.0 - u) * (2.0 - v) / denom) <= 1e-9,
                  "F weak-estimate off closed form", row);
            check(std::abs(*row.wb_est - (1.0 - u + u * v) / denom) <= 1e-9,
                  "B weak-estimate off closed form", row);
            check(std::abs(*row.wf_first) <= 1e-12, "first-order F estimate not 0", row);

            rows.push_back(std::move(row));
        }

    // The F estimate must die off quadratically as the B coupling weakens.
    const double df_min = *std::min_element(dfs.begin(), dfs.end());
    std::vector<double> xs, ys;
    for (const auto& row : rows)
        if (*row.delta_f == df_min && *row.delta_b <= 0.2 * p.sigma) {
            xs.push_back(*row.delta_b);
            ys.push_back(*row.wf_est);
        }
    if (xs.size() >= 3) {
        const double order = power_law_exponent(xs, ys);
        check(std::abs(order - 2.0) <= 0.3, "F estimate does not vanish at second order",
              rows.back());
    }
    return rows;
}

std::vector<ScanRow> strong_b(const Circuit& c, const ScenarioParams& p) {
    std::vector<double> deltas = p.delta_b;
    if (deltas.empty()) deltas = {10.0 * p.sigma, 100.0 * p.sigma};

    std::vector<ScanRow> rows;
    for (double delta : deltas) {
        const std::vector<MeterDevice> devs = {device_b(delta, p.sigma)};
        ScanRow row;
        row.scenario = "strong_b";
        row.delta_b = delta;
        row.sigma = p.sigma;
        row.seed = p.seed;

        const PointerReport rep = pointer_report(c, c.source(), "D", devs);
        row.p_d = rep.postselection_probability;
        row.wb_est = rep.weak_estimates.at("B");
        row.wb_first = first_order_prediction(c, c.source(), "D", devs, "B") / delta;
        row.p_f_flux = flux_with_devices(c, c.source(), "F", 3, devs);

        // Which-path information this strong reproduces full dephasing at B.
        const double dec_flux = decohere_flux(c, c.source(), "B", 2, "F", 3);
        check(std::abs(*row.p_f_flux - dec_flux) <= 1e-3, "strong limit misses dephased flux",
              row);
        const auto dec_ports = decohere_path(c, "B", 2, c.source());
        for (const auto& r : all_pointer_reports(c, c.source(), devs))
            check(std::abs(r.postselection_probability - dec_ports.at(r.terminal)) <= 1e-3,
                  "strong limit misses dephased port probability at " + r.terminal, row);
        check(std::abs(*row.wb_est - 1.0) <= 1e-12, "B estimate not 1", row);

        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ScanRow> leak_budget(const Circuit& c, const ScenarioParams& p) {
    std::vector<double> deltas = p.delta_b;
    if (deltas.empty())
        deltas = {0.1 * p.sigma, 0.05 * p.sigma, 0.01 * p.sigma, 0.001 * p.sigma};

    std::vector<ScanRow> rows;
    const double nominal = 3.0 * p.k * p.k / 8.0;
    for (double delta : deltas) {
        const std::vector<MeterDevice> devs = {device_b(delta, p.sigma)};
        ScanRow row;
        row.scenario = "leak_budget";
        row.delta_b = delta;
        row.sigma = p.sigma;
        row.k = p.k;
        row.seed = p.seed;

        const ResolutionBudget budget =
            resolution_budget(c, c.source(), "D", devs, "B", p.k, "F", 3);
        row.expected_leaked = budget.expected_leaked;
        const PointerReport rep = pointer_report(c, c.source(), "D", devs);
        row.p_d = rep.postselection_probability;
        row.wb_est = rep.weak_estimates.at("B");
        row.wb_first = 1.0;
        row.p_f_flux = flux_with_devices(c, c.source(), "F", 3, devs);

        if (delta <= 0.01 * p.sigma)
            check(std::abs(*row.expected_leaked - nominal) <= 0.02 * nominal,
                  "expected leak off 3k^2/8", row);
        rows.push_back(std::move(row));
    }

    double lo = rows.front().expected_leaked.value(), hi = lo;
    for (const auto& row : rows) {
        lo = std::min(lo, *row.expected_leaked);
        hi = std::max(hi, *row.expected_leaked);
    }
    check((hi - lo) / hi < 0.05, "expected leak varies with delta", rows.back());
    return rows;
}

}  // namespace

std::string csv_header() {
    return "scenario,delta_b,delta_f,sigma,k,p_d,p_f_flux,wb_est,wf_est,wb_first,wf_first,"
           "expected_leaked,seed";
}

std::string csv_row(const ScanRow& row) {
    std::string out = row.scenario;
    for (const auto* v : {&row.delta_b, &row.delta_f, &row.sigma, &row.k, &row.p_d,
                          &row.p_f_flux, &row.wb_est, &row.wf_est, &row.wb_first,
                          &row.wf_first, &row.expected_leaked})
        out += "," + csv_cell(*v);
    out += ",";
    if (row.seed) out += std::to_string(*row.seed);
    return out;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {
        "baseline_counterfactual", "weak_b_scan", "bf_simultaneous", "strong_b", "leak_budget",
    };
    return names;
}

std::vector<ScanRow> run_scenario(const std::string& name, const ScenarioParams& params) {
    const Circuit c = canonical_network();
    if (name == "baseline_counterfactual") return baseline_counterfactual(c, params);
    if (name == "weak_b_scan") return weak_b_scan(c, params);
    if (name == "bf_simultaneous") return bf_simultaneous(c, params);
    if (name == "strong_b") return strong_b(c, params);
    if (name == "leak_budget") return leak_budget(c, params);
    std::string known;
    for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name + "'; valid names: " + known);
}

}  // namespace weakpointer
