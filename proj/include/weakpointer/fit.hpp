#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace weakpointer {

// Least-squares exponent p of y ~ C x^p on log-log axes. All samples must be
// strictly positive; degenerate inputs (fewer than 2 points, zero spread in
// x) are caller bugs.
inline double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("power_law_exponent needs >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("power_law_exponent needs positive samples");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("power_law_exponent: no spread in x");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace weakpointer
