#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace rve::core {

// Opaque state handle. Finite environments fill (t, x); continuous ones
// leave x = -1 and put the physical state in `values`.
struct State {
    std::int32_t t = 0;
    std::int32_t x = 0;
    std::array<double, 4> values{};

    bool finite() const { return x >= 0; }
    // stable key for finite states, used for grouping and caches
    std::int64_t key() const { return (static_cast<std::int64_t>(t) << 32) | static_cast<std::uint32_t>(x); }
    bool operator==(const State& o) const { return t == o.t && x == o.x && values == o.values; }
};

struct Transition {
    State old_state;
    int action = 0;
    double reward = 0.0;
    std::optional<State> new_state;  // empty on termination
    int timestep = 0;
};

struct EpisodeOutcome {
    std::vector<Transition> transitions;
    double return_total = 0.0;
    int length() const { return static_cast<int>(transitions.size()); }
};

struct RegretTrace {
    std::vector<double> per_episode_regret;
    std::vector<double> per_episode_return;
    std::uint64_t seed = 0;

    std::size_t size() const { return per_episode_return.size(); }
    std::vector<double> cumulative_regret() const;
};

}  // namespace rve::core
