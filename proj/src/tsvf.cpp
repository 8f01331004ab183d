#include "weakpointer/tsvf.hpp"

#include <sstream>

namespace weakpointer {

cplx overlap(const Circuit& c, const PathId& source, const PathId& terminal) {
    StageAmplitudes fwd = forward_amplitudes(c, source);
    StageAmplitudes back = backward_amplitudes(c, terminal);
    const int last = c.last_stage();
    cplx s = 0.0;
    for (const auto& p : c.stage_paths(last)) s += back.at(last, p) * fwd.at(last, p);
    return s;
}

namespace {

cplx checked_overlap(const Circuit& c, const PathId& source, const PathId& terminal) {
    const cplx o = overlap(c, source, terminal);
    if (std::abs(o) < kOverlapTol) {
        std::ostringstream os;
        os << "post-selection overlap <" << terminal << "|" << source << "> has magnitude "
           << std::abs(o) << ", below " << kOverlapTol;
        throw PostselectionError(os.str());
    }
    return o;
}

}  // namespace

cplx weak_value(const Circuit& c, const PathId& source, const PathId& terminal,
                const Observable& obs) {
    for (const auto& [p, w] : obs.terms)
        if (!c.has_path_at(p, obs.stage))
            throw CircuitError("observable path '" + p + "' absent at stage " +
                               std::to_string(obs.stage));
    const cplx o = checked_overlap(c, source, terminal);
    StageAmplitudes fwd = forward_amplitudes(c, source);
    StageAmplitudes back = backward_amplitudes(c, terminal);
    cplx num = 0.0;
    for (const auto& [p, w] : obs.terms) num += w * back.at(obs.stage, p) * fwd.at(obs.stage, p);
    return num / o;
}

WeakValueTable weak_probability_table(const Circuit& c, const PathId& source,
                                      const PathId& terminal, int stage) {
    if (stage < 0 || stage >= c.num_stages())
        throw CircuitError("stage index " + std::to_string(stage) + " out of range");
    const cplx o = checked_overlap(c, source, terminal);
    StageAmplitudes fwd = forward_amplitudes(c, source);
    StageAmplitudes back = backward_amplitudes(c, terminal);
    WeakValueTable t;
    t.stage = stage;
    t.sum = 0.0;
    for (const auto& p : c.stage_paths(stage)) {
        const cplx v = back.at(stage, p) * fwd.at(stage, p) / o;
        t.values[p] = v;
        t.sum += v;
    }
    return t;
}

}  // namespace weakpointer
