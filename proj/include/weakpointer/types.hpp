#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace weakpointer {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;

// Path labels are plain strings ("A", "B", "D'"); unique within a circuit.
using PathId = std::string;

// Construction-time validation failures: non-unitary couplers, dangling
// paths, duplicate names, bad stage ranges.
struct CircuitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Pre/post-selection overlap too small to condition on.
struct PostselectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed config documents (JSON schema violations, unknown fields).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid oracle resolution/size problems.
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Any coupler or stage map must be unitary to this tolerance; analytic
// matrices that miss it are construction bugs, not roundoff.
inline constexpr double kUnitaryTol = 1e-12;

// |<psi2|psi1>| below this means post-selection is (numerically) impossible
// and conditional quantities are refused rather than returned as huge values.
inline constexpr double kOverlapTol = 1e-14;

// Detection probability below this cannot be conditioned on.
inline constexpr double kPostselectionTol = 1e-14;

// Guard against pathological circuits whose trajectory count explodes.
inline constexpr std::size_t kMaxHistories = 1'000'000;

// A correct envelope accepts ~1/H of proposals; hitting this cap means the
// envelope bound is broken.
inline constexpr std::size_t kMaxRejectionProposals = 1'000'000;

}  // namespace weakpointer
