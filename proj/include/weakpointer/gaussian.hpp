#pragma once

#include <cmath>

namespace weakpointer {

// Meter wavefunctions are unit-norm Gaussians
//     G_s(x) = (2 pi sigma^2)^(-1/4) exp(-(x - s)^2 / (4 sigma^2)),
// so the intensity profile |G_s|^2 has standard deviation sigma and mean s.

// Overlap <G_a|G_b> = exp(-(a-b)^2 / (8 sigma^2)).
inline double gaussian_overlap(double a, double b, double sigma) {
    const double d = a - b;
    return std::exp(-d * d / (8.0 * sigma * sigma));
}

// First moment <G_a|x|G_b> = ((a+b)/2) * <G_a|G_b>.
inline double gaussian_x_moment(double a, double b, double sigma) {
    return 0.5 * (a + b) * gaussian_overlap(a, b, sigma);
}

// Pointwise amplitude G_s(x).
inline double gaussian_amplitude(double x, double shift, double sigma) {
    const double d = x - shift;
    return std::pow(2.0 * M_PI * sigma * sigma, -0.25) *
           std::exp(-d * d / (4.0 * sigma * sigma));
}

}  // namespace weakpointer
