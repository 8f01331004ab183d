#pragma once

#include <map>
#include <string>

#include "weakpointer/circuit.hpp"
#include "weakpointer/types.hpp"

namespace weakpointer {

// Diagonal observable on the path basis at one stage cut. Paths not listed
// in terms carry coefficient zero.
struct Observable {
    int stage = 0;
    std::map<PathId, double> terms;
};

inline Observable path_projector(const PathId& path, int stage) {
    return Observable{stage, {{path, 1.0}}};
}

struct WeakValueTable {
    int stage = 0;
    std::map<PathId, cplx> values;
    cplx sum;
};

// <psi2|psi1>, evaluated at the final cut. Stage-independent for a valid
// circuit; see pairing_invariance in the tests.
cplx overlap(const Circuit& c, const PathId& source, const PathId& terminal);

// <psi2|A|psi1> / <psi2|psi1>. Throws PostselectionError when the overlap
// magnitude is below kOverlapTol.
cplx weak_value(const Circuit& c, const PathId& source, const PathId& terminal,
                const Observable& obs);

// Weak values of every path projector at one cut. values sums to 1 by
// completeness whenever the stage map is unitary.
WeakValueTable weak_probability_table(const Circuit& c, const PathId& source,
                                      const PathId& terminal, int stage);

}  // namespace weakpointer
