#pragma once

#include <span>

#include "rve/core/rng.hpp"
#include "rve/core/types.hpp"

namespace rve::envs {
struct FiniteMdp;
}

namespace rve::core {

struct StepResult {
    double reward = 0.0;
    std::optional<State> next;  // empty when the episode is over
};

class Environment {
public:
    virtual ~Environment() = default;
    virtual State reset(Rng& rng) = 0;
    virtual StepResult step(int action, Rng& rng) = 0;
    virtual int num_actions() const = 0;

    // Exact model for finite environments, null otherwise. Period t of the
    // model corresponds to State{t, x}.
    virtual const envs::FiniteMdp* planning_model() const { return nullptr; }
    virtual State state_at(int t, int x) const { return State{t, x, {}}; }
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual int act(const State& s, Rng& rng) = 0;
    virtual void update_buffer(const Transition& tr) = 0;
    virtual void learn_from_buffer(Rng& rng) = 0;

    // Probabilities of each action under the policy in force for the current
    // episode. Returns false when the agent cannot report them.
    virtual bool action_distribution(const State& s, std::span<double> out) const {
        (void)s;
        (void)out;
        return false;
    }
};

}  // namespace rve::core
