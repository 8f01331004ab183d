#include <doctest.h>

#include <cmath>
#include <vector>

#include "weakpointer/fit.hpp"
#include "weakpointer/pointer.hpp"
#include "weakpointer/scenarios.hpp"

using namespace weakpointer;

namespace {

MeterDevice on_b(double delta, double sigma = 1.0) { return {"B", "B", 2, delta, sigma}; }
MeterDevice on_f(double delta, double sigma = 1.0) { return {"F", "F", 3, delta, sigma}; }
MeterDevice on_c(double delta, double sigma = 1.0) { return {"C", "C", 2, delta, sigma}; }

double gauss(double d, double sigma) { return std::exp(-d * d / (8.0 * sigma * sigma)); }

}  // namespace

TEST_CASE("history enumeration of the bare network") {
    const Circuit c = canonical_network();
    const auto hs = enumerate_histories(c, "in", {});
    CHECK(hs.size() == 8);

    std::map<PathId, int> counts;
    std::map<PathId, cplx> sums;
    for (const auto& h : hs) {
        counts[h.terminal] += 1;
        sums[h.terminal] += h.amplitude;
        CHECK(h.shifts.empty());
        CHECK(h.trace.size() == 5);
        CHECK(h.trace.front() == "in");
        CHECK(h.trace.back() == h.terminal);
    }
    CHECK(counts["D"] == 3);
    CHECK(counts["D'"] == 3);
    CHECK(counts["G_dump"] == 2);

    // summed trajectory amplitudes reproduce the wave picture
    const StageAmplitudes fwd = forward_amplitudes(c, "in");
    for (const auto& [port, s] : sums)
        CHECK(std::abs(s - fwd.at(c.last_stage(), port)) <= 1e-14);
}

TEST_CASE("partial histories stop at the cut") {
    const Circuit c = canonical_network();
    CHECK(partial_histories(c, "in", {}, 0).size() == 1);
    const auto mid = partial_histories(c, "in", {}, 2);
    CHECK(mid.size() == 3);
    for (const auto& h : mid) CHECK(h.trace.size() == 3);
    CHECK_THROWS_AS(partial_histories(c, "in", {}, 7), CircuitError);
}

TEST_CASE("device shifts are recorded per trajectory") {
    const Circuit c = canonical_network();
    const double db = 0.3, df = 0.07;
    const auto hs = enumerate_histories(c, "in", {on_b(db), on_f(df)});
    for (const auto& h : hs) {
        if (h.terminal != "D") continue;
        const bool via_b = std::find(h.trace.begin(), h.trace.end(), "B") != h.trace.end();
        const bool via_f = std::find(h.trace.begin(), h.trace.end(), "F") != h.trace.end();
        CHECK(h.shifts.at("B") == (via_b ? db : 0.0));
        CHECK(h.shifts.at("F") == (via_f ? df : 0.0));
    }
}

TEST_CASE("device validation") {
    const Circuit c = canonical_network();
    CHECK_THROWS_AS(validate_devices(c, {{"", "B", 2, 0.1, 1.0}}), ConfigError);
    CHECK_THROWS_AS(validate_devices(c, {on_b(0.1), on_b(0.2)}), ConfigError);
    CHECK_THROWS_AS(validate_devices(c, {{"B", "B", 2, 0.1, 0.0}}), ConfigError);
    CHECK_THROWS_AS(validate_devices(c, {{"B", "B", 2, 0.1, -1.0}}), ConfigError);
    CHECK_THROWS_AS(validate_devices(c, {{"X", "B", 1, 0.1, 1.0}}), ConfigError);
    CHECK_NOTHROW(validate_devices(c, {on_b(0.1), on_f(0.2)}));
}

TEST_CASE("single weak device on the inner arm") {
    const Circuit c = canonical_network();
    for (const double delta : {0.05, 0.2, 1.0}) {
        const double u = gauss(delta, 1.0);
        const auto r = pointer_report(c, "in", "D", {on_b(delta)});

        // the dark-port interference hides the device from the click rate
        CHECK(r.postselection_probability == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
        // and the pointer moves by the full delta at any strength
        CHECK(r.means.at("B") == doctest::Approx(delta).epsilon(1e-13));
        CHECK(r.weak_estimates.at("B") == doctest::Approx(1.0).epsilon(1e-13));

        const auto r2 = pointer_report(c, "in", "D'", {on_b(delta)});
        CHECK(r2.postselection_probability ==
              doctest::Approx((5.0 - 3.0 * u) / 9.0).epsilon(1e-13));
        CHECK(r2.means.at("B") ==
              doctest::Approx(delta * (1.0 - 3.0 * u) / (2.0 * (5.0 - 3.0 * u)))
                  .epsilon(1e-12));

        const auto r3 = pointer_report(c, "in", "G_dump", {on_b(delta)});
        CHECK(r3.postselection_probability ==
              doctest::Approx((1.0 + u) / 3.0).epsilon(1e-13));
    }
}

TEST_CASE("zero displacement moves nothing") {
    const Circuit c = canonical_network();
    const auto r = pointer_report(c, "in", "D", {on_b(0.0)});
    CHECK(r.means.at("B") == doctest::Approx(0.0));
    CHECK(r.weak_estimates.count("B") == 0);  // no estimate without a shift
}

TEST_CASE("mirror symmetry of the pointer mean") {
    const Circuit c = canonical_network();
    const auto plus = pointer_report(c, "in", "D'", {on_b(0.4)});
    const auto minus = pointer_report(c, "in", "D'", {on_b(-0.4)});
    CHECK(plus.means.at("B") == doctest::Approx(-minus.means.at("B")).epsilon(1e-13));
    CHECK(plus.postselection_probability ==
          doctest::Approx(minus.postselection_probability).epsilon(1e-14));
}

TEST_CASE("port probabilities with devices sum to one") {
    const Circuit c = canonical_network();
    const auto reports = all_pointer_reports(c, "in", {on_b(0.7), on_f(0.3)});
    double total = 0.0;
    for (const auto& r : reports) total += r.postselection_probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("simultaneous devices on the inner arm and the dark output") {
    const Circuit c = canonical_network();
    const double db = 1.0, df = 0.001, sigma = 1.0;
    const double u = gauss(db, sigma), v = gauss(df, sigma);
    const double denom = 3.0 - 2.0 * u - 2.0 * v + 2.0 * u * v;

    const auto r = pointer_report(c, "in", "D", {on_b(db), on_f(df)});
    CHECK(r.postselection_probability == doctest::Approx(denom / 9.0).epsilon(1e-13));
    CHECK(r.weak_estimates.at("F") ==
          doctest::Approx((1.0 - u) * (2.0 - v) / denom).epsilon(1e-12));
    CHECK(r.weak_estimates.at("B") ==
          doctest::Approx((1.0 - u + u * v) / denom).epsilon(1e-12));

    // the dark output acquires a first-order signal only through the
    // disturbance of the inner device; alone it predicts zero
    CHECK(first_order_prediction(c, "in", "D", {on_b(db), on_f(df)}, "F") == 0.0);
    CHECK(first_order_prediction(c, "in", "D", {on_b(db), on_f(df)}, "B") ==
          doctest::Approx(db).epsilon(1e-13));
}

TEST_CASE("flux at the dark path grows with the device strength") {
    const Circuit c = canonical_network();
    CHECK(flux_with_devices(c, "in", "F", 3, {}) <= 1e-15);
    CHECK(flux_with_devices(c, "in", "F", 3, {on_b(0.0)}) <= 1e-15);
    for (const double delta : {0.05, 0.1, 0.5, 2.0}) {
        const double expect = (1.0 - gauss(delta, 1.0)) / 3.0;
        CHECK(flux_with_devices(c, "in", "F", 3, {on_b(delta)}) ==
              doctest::Approx(expect).epsilon(1e-13));
    }
    // source flux is unaffected
    CHECK(flux_with_devices(c, "in", "in", 0, {on_b(0.5)}) == doctest::Approx(1.0));
}

TEST_CASE("an absorber on the dark path collects exactly the flux") {
    const Circuit c = canonical_network();
    const Circuit detected = terminate_at(c, "F", 3);
    const double delta = 0.3;
    const double flux = flux_with_devices(c, "in", "F", 3, {on_b(delta)});
    const auto reports = all_pointer_reports(detected, "in", {on_b(delta)});
    double at_f = -1.0, total = 0.0;
    for (const auto& r : reports) {
        total += r.postselection_probability;
        if (r.terminal == "F") at_f = r.postselection_probability;
    }
    CHECK(at_f == doctest::Approx(flux).epsilon(1e-13));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("strong devices reduce to the dephased mixture") {
    const Circuit c = canonical_network();
    for (const double delta : {10.0, 100.0}) {
        const auto mixture = decohere_path(c, "B", 2, "in");
        for (const auto& r : all_pointer_reports(c, "in", {on_b(delta)}))
            CHECK(std::abs(r.postselection_probability - mixture.at(r.terminal)) <= 1e-3);
        CHECK(std::abs(flux_with_devices(c, "in", "F", 3, {on_b(delta)}) -
                       decohere_flux(c, "in", "B", 2, "F", 3)) <= 1e-3);
    }
}

TEST_CASE("branch decomposition across the dark path") {
    const Circuit c = canonical_network();
    const double delta = 0.6, u = gauss(delta, 1.0);
    const auto d = branch_decomposition(c, "in", "D", {on_b(delta)}, "B", "F");
    CHECK(d.through == doctest::Approx(delta * (1.0 - u) / 9.0).epsilon(1e-12));
    CHECK(std::abs(d.not_through) <= 1e-15);
    CHECK(d.cross == doctest::Approx(delta * u / 9.0).epsilon(1e-12));

    const auto r = pointer_report(c, "in", "D", {on_b(delta)});
    CHECK(d.total() ==
          doctest::Approx(r.means.at("B") * r.postselection_probability).epsilon(1e-12));

    // cutting on the direct arm instead swaps the diagonal buckets
    const auto da = branch_decomposition(c, "in", "D", {on_b(delta)}, "B", "A");
    CHECK(std::abs(da.through) <= 1e-15);
    CHECK(da.not_through == doctest::Approx(d.through).epsilon(1e-12));
    CHECK(da.cross == doctest::Approx(d.cross).epsilon(1e-12));
    CHECK(da.total() == doctest::Approx(d.total()).epsilon(1e-12));

    CHECK_THROWS_AS(branch_decomposition(c, "in", "D", {on_b(delta)}, "nope", "F"),
                    ConfigError);
}

TEST_CASE("first order prediction follows the weak trace") {
    const Circuit c = canonical_network();
    const double delta = 0.25;
    CHECK(first_order_prediction(c, "in", "D", {on_b(delta)}, "B") ==
          doctest::Approx(delta).epsilon(1e-14));
    CHECK(first_order_prediction(c, "in", "D", {on_f(delta)}, "F") == 0.0);
    CHECK(first_order_prediction(c, "in", "D", {on_c(delta)}, "C") ==
          doctest::Approx(-delta).epsilon(1e-14));
    CHECK_THROWS_AS(first_order_prediction(c, "in", "D", {on_b(delta)}, "nope"), ConfigError);
}

TEST_CASE("deviation from the linear response is third order") {
    const Circuit c = canonical_network();
    std::vector<double> deltas = {0.05, 0.1, 0.2, 0.4}, errs;
    for (const double delta : deltas) {
        const auto r = pointer_report(c, "in", "D", {on_c(delta)});
        const double pred = first_order_prediction(c, "in", "D", {on_c(delta)}, "C");
        errs.push_back(std::abs(r.means.at("C") - pred));
    }
    const double order = power_law_exponent(deltas, errs);
    CHECK(order > 2.6);
    CHECK(order < 3.1);
}

TEST_CASE("pointer report rejects bad ports") {
    const Circuit c = canonical_network();
    CHECK_THROWS_AS(pointer_report(c, "in", "F", {on_b(0.1)}), CircuitError);

    CircuitSpec spec;
    spec.stages = {"s0", "s1"};
    spec.paths = {{"p", 0, 1}, {"q", 0, 1}};
    spec.source = "p";
    spec.terminals = {"p", "q"};
    const Circuit split = build_circuit(spec);
    CHECK_THROWS_AS(pointer_report(split, "p", "q", {}), PostselectionError);
    const auto reports = all_pointer_reports(split, "p", {});
    for (const auto& r : reports) {
        if (r.terminal != "q") continue;
        CHECK(r.postselection_probability <= 1e-15);
        CHECK(r.means.empty());
    }
}
