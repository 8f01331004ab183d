#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace weakpointer {

// 17 significant digits: round-trip exact for doubles. Non-finite values in
// any output are hard errors, never silently serialized.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite value in output");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace weakpointer
