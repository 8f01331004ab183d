#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weakpointer/circuit.hpp"

namespace weakpointer {

// The nested two-interferometer network: an outer 1/3:2/3 split between A and
// the inner loop, a balanced inner interferometer whose F output is dark, and
// recombination of A with F onto D / D'. Ports: D, D', G_dump.
Circuit canonical_network();

// One parameter point of a named scenario. Fields that do not apply stay
// empty and serialize as empty CSV cells.
struct ScanRow {
    std::string scenario;
    std::optional<double> delta_b;
    std::optional<double> delta_f;
    std::optional<double> sigma;
    std::optional<double> k;
    std::optional<double> p_d;
    std::optional<double> p_f_flux;
    std::optional<double> wb_est;
    std::optional<double> wf_est;
    std::optional<double> wb_first;
    std::optional<double> wf_first;
    std::optional<double> expected_leaked;
    std::optional<std::uint64_t> seed;
};

// Column order is fixed; the header is always emitted.
std::string csv_header();
std::string csv_row(const ScanRow& row);

struct ScenarioParams {
    std::vector<double> delta_b;  // empty: scenario default
    std::vector<double> delta_f;  // empty: scenario default
    double sigma = 1.0;
    double k = 5.0;
    std::optional<std::uint64_t> seed;
};

// A scenario's internal consistency check failed; carries the offending row.
struct ScenarioError : std::runtime_error {
    ScanRow row;
    ScenarioError(const std::string& msg, ScanRow r)
        : std::runtime_error(msg), row(std::move(r)) {}
};

const std::vector<std::string>& scenario_names();

// Runs a named scenario over its parameter grid, validating every row's
// closed-form expectations before returning it. Unknown name -> ConfigError;
// failed expectation -> ScenarioError.
std::vector<ScanRow> run_scenario(const std::string& name, const ScenarioParams& params);

}  // namespace weakpointer
