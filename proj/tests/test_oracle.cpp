#include <doctest.h>

#include <cmath>

#include "weakpointer/oracle.hpp"
#include "weakpointer/scenarios.hpp"

using namespace weakpointer;

namespace {

MeterDevice on_b(double delta, double sigma = 1.0) { return {"B", "B", 2, delta, sigma}; }
MeterDevice on_f(double delta, double sigma = 1.0) { return {"F", "F", 3, delta, sigma}; }

double gauss(double d, double sigma) { return std::exp(-d * d / (8.0 * sigma * sigma)); }

}  // namespace

TEST_CASE("grid run without devices reproduces the port probabilities") {
    const Circuit c = canonical_network();
    const GridResult res = grid_simulate(c, "in", {}, GridSpec{8.0, 512});
    CHECK(res.ports.at("D").probability == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(res.ports.at("D'").probability == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    CHECK(res.ports.at("G_dump").probability == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.ports.at("D").means.empty());
    CHECK(res.max_norm_drift <= 1e-12);
    CHECK(res.fluxes[3].at("F") <= 1e-15);
}

TEST_CASE("grid run with a weak device on the inner arm") {
    const Circuit c = canonical_network();
    const GridResult res = grid_simulate(c, "in", {on_b(0.1)}, GridSpec{8.0, 4096});

    // 0.1 is not a multiple of the spacing 16/4096; it lands on 26 cells
    CHECK(res.snapped_deltas.at("B") == doctest::Approx(0.1015625).epsilon(1e-15));
    CHECK(res.snap_errors.at("B") == doctest::Approx(0.0015625).epsilon(1e-12));
    const double ds = res.snapped_deltas.at("B");

    const auto& d = res.ports.at("D");
    CHECK(d.probability == doctest::Approx(1.0 / 9.0).epsilon(1e-9));
    CHECK(std::abs(d.means.at("B") - ds) <= 1e-6);
    CHECK(std::abs(d.weak_estimates.at("B") - 1.0) <= 1e-5);
    // post-selection on D leaves the meter in a displaced Gaussian
    CHECK(std::abs(d.variances.at("B") - 1.0) <= 1e-9);

    const double u = gauss(ds, 1.0);
    CHECK(std::abs(res.fluxes[3].at("F") - (1.0 - u) / 3.0) <= 1e-9);
    CHECK(std::abs(res.ports.at("G_dump").probability - (1.0 + u) / 3.0) <= 1e-9);

    double total = 0.0;
    for (const auto& [port, r] : res.ports) total += r.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.max_norm_drift <= 1e-9);
}

TEST_CASE("doubling the grid leaves the observables fixed") {
    const Circuit c = canonical_network();
    // exact multiple of the spacing on both grids: 26/256 = 52/512
    const double delta = 0.1015625;
    const GridResult coarse = grid_simulate(c, "in", {on_b(delta)}, GridSpec{8.0, 4096});
    const GridResult fine = grid_simulate(c, "in", {on_b(delta)}, GridSpec{8.0, 8192});
    CHECK(coarse.snap_errors.at("B") == 0.0);
    CHECK(fine.snap_errors.at("B") == 0.0);
    for (const std::string port : {"D", "D'", "G_dump"}) {
        CHECK(std::abs(coarse.ports.at(port).probability -
                       fine.ports.at(port).probability) <= 1e-8);
        CHECK(std::abs(coarse.ports.at(port).means.at("B") -
                       fine.ports.at(port).means.at("B")) <= 1e-8);
    }
    CHECK(std::abs(coarse.fluxes[3].at("F") - fine.fluxes[3].at("F")) <= 1e-8);
}

TEST_CASE("sub-resolution displacements are refused") {
    const Circuit c = canonical_network();
    CHECK_THROWS_WITH_AS(grid_simulate(c, "in", {on_b(0.001)}, GridSpec{8.0, 4096}),
                         doctest::Contains("below the grid spacing"), GridError);
    // exactly zero is fine, it just produces no estimate
    const GridResult res = grid_simulate(c, "in", {on_b(0.0)}, GridSpec{8.0, 512});
    CHECK(res.ports.at("D").weak_estimates.empty());
    CHECK(res.ports.at("D").probability == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("grid parameter validation") {
    const Circuit c = canonical_network();
    CHECK_THROWS_AS(grid_simulate(c, "in", {}, GridSpec{8.0, 511}), GridError);
    CHECK_THROWS_AS(grid_simulate(c, "in", {}, GridSpec{8.0, 513}), GridError);
    CHECK_THROWS_AS(grid_simulate(c, "in", {}, GridSpec{4.0, 1024}), GridError);
    const std::vector<MeterDevice> four = {
        on_b(0.5), on_f(0.5), {"C", "C", 2, 0.5, 1.0}, {"A", "A", 1, 0.5, 1.0}};
    CHECK_THROWS_AS(grid_simulate(c, "in", four, GridSpec{8.0, 512}), GridError);
}

TEST_CASE("two simultaneous devices match the pair closed form") {
    const Circuit c = canonical_network();
    const GridResult res =
        grid_simulate(c, "in", {on_b(1.0), on_f(0.02)}, GridSpec{8.0, 1024});
    CHECK(res.snapped_deltas.at("B") == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(res.snapped_deltas.at("F") == doctest::Approx(0.015625).epsilon(1e-15));

    const double u = gauss(1.0, 1.0), v = gauss(0.015625, 1.0);
    const double denom = 3.0 - 2.0 * u - 2.0 * v + 2.0 * u * v;
    const auto& d = res.ports.at("D");
    CHECK(std::abs(d.probability - denom / 9.0) <= 1e-9);
    CHECK(std::abs(d.weak_estimates.at("F") - (1.0 - u) * (2.0 - v) / denom) <= 1e-6);
    CHECK(std::abs(d.weak_estimates.at("B") - (1.0 - u + u * v) / denom) <= 1e-6);
    CHECK(res.max_norm_drift <= 1e-9);
}

TEST_CASE("absorbers capture flux on the grid") {
    const Circuit c = terminate_at(canonical_network(), "F", 3);

    const GridResult quiet = grid_simulate(c, "in", {}, GridSpec{8.0, 512});
    CHECK(quiet.ports.at("F").probability <= 1e-15);
    CHECK(quiet.ports.at("D").probability == doctest::Approx(1.0 / 9.0).epsilon(1e-12));

    const GridResult res = grid_simulate(c, "in", {on_b(0.5)}, GridSpec{8.0, 1024});
    const double u = gauss(res.snapped_deltas.at("B"), 1.0);
    CHECK(std::abs(res.ports.at("F").probability - (1.0 - u) / 3.0) <= 1e-9);
    CHECK(res.ports.at("D").probability == doctest::Approx(1.0 / 9.0).epsilon(1e-9));
    double total = 0.0;
    for (const auto& [port, r] : res.ports) total += r.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}
