#pragma once

#include <cstdint>
#include <vector>

namespace ddqn {

// One (s, a, r, s', done) record.  `done` marks a true terminal; episodes cut
// by the step limit are stored with done = false when bootstrapping through
// timeouts.
struct Transition {
    std::vector<double> s;
    int a = 0;
    double r = 0.0;
    std::vector<double> s_next;
    bool done = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

// A transition tagged with the (1-based) environment step that produced it.
struct TraceRow {
    std::uint64_t step = 0;
    Transition t;
    // The episode ended at this step because of the step limit.
    bool timeout = false;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

}  // namespace ddqn
