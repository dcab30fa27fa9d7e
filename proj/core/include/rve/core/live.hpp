#pragma once

#include <functional>
#include <optional>

#include "rve/core/interfaces.hpp"

namespace rve::core {

struct LiveOptions {
    // score episodes by realized return instead of exact policy evaluation
    bool realized_regret = false;
    // checked after each episode; returning true ends the run early
    std::function<bool(const RegretTrace&)> stop;
    std::function<void(int episode, const EpisodeOutcome&)> on_episode;
};

RegretTrace live(Agent& agent, Environment& env, int num_episodes, RunStreams& streams,
                 const LiveOptions& opts = {});

// min { L > 1 : mean regret over the first L episodes <= threshold }, 1-based
std::optional<int> learning_time(const RegretTrace& trace, double threshold = 0.5);

}  // namespace rve::core
