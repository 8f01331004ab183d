#include <doctest.h>

#include <cmath>

#include "support/quadrature.hpp"
#include "weakpointer/gaussian.hpp"

using namespace weakpointer;

TEST_CASE("overlap of identical meter states is 1") {
    CHECK(gaussian_overlap(0.0, 0.0, 1.0) == 1.0);
    CHECK(gaussian_overlap(3.7, 3.7, 0.2) == 1.0);
    CHECK(gaussian_overlap(-1.0, -1.0, 5.0) == 1.0);
}

TEST_CASE("overlap matches the quadrature oracle") {
    for (double sigma : {0.5, 1.0, 2.0})
        for (double b : {0.01, 0.3, 1.0, 3.0}) {
            const double quad = testsupport::overlap_quadrature(0.0, b * sigma, sigma);
            CHECK(gaussian_overlap(0.0, b * sigma, sigma) == doctest::Approx(quad).epsilon(1e-12));
        }
    // one-sigma displacement, frozen value
    CHECK(gaussian_overlap(0.0, 1.0, 1.0) ==
          doctest::Approx(0.8824969025845955).epsilon(1e-15));
    CHECK(gaussian_overlap(0.0, 1.0, 1.0) == std::exp(-0.125));
}

TEST_CASE("strong displacement is near orthogonal") {
    const double o = gaussian_overlap(0.0, 10.0, 1.0);
    CHECK(o == std::exp(-12.5));
    CHECK(o == doctest::Approx(3.7e-6).epsilon(0.01));
    CHECK(o == doctest::Approx(testsupport::overlap_quadrature(0.0, 10.0, 1.0)).epsilon(1e-9));
}

TEST_CASE("x moment matches the quadrature oracle") {
    for (double sigma : {0.5, 1.0, 2.0})
        for (double b : {0.05, 0.4, 1.5}) {
            const double quad = testsupport::moment_quadrature(0.0, b * sigma, sigma, 1);
            CHECK(gaussian_x_moment(0.0, b * sigma, sigma) ==
                  doctest::Approx(quad).epsilon(1e-11));
        }
}

TEST_CASE("x moment special values") {
    // displaced state: plain expectation
    CHECK(gaussian_x_moment(0.7, 0.7, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
    // antisymmetric pair
    CHECK(gaussian_x_moment(-0.3, 0.3, 1.0) == 0.0);
    // half-overlap form
    const double d = 0.25;
    CHECK(gaussian_x_moment(0.0, d, 1.0) ==
          doctest::Approx(0.5 * d * std::exp(-d * d / 8.0)).epsilon(1e-15));
}

TEST_CASE("pointwise amplitude is unit-norm") {
    const double quad = testsupport::simpson(
        [](double x) {
            const double g = weakpointer::gaussian_amplitude(x, 0.4, 1.3);
            return g * g;
        },
        -20.0, 20.0, 20000);
    CHECK(quad == doctest::Approx(1.0).epsilon(1e-12));
}
