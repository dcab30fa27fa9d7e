#pragma once

#include "rve/agents/tabular.hpp"
#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::baselines {

// Episodic UCRL2. Confidence widths use the Jaksch et al. (2010) constants
// with S = H * X unrolled states:
//   reward:     sqrt(7 log(2 S A t / delta) / (2 max(1, n))) * reward_range
//   transition: sqrt(14 S log(2 A t / delta) / max(1, n))     (L1 radius)
// where n counts every observation `multiplier` times and t is the number of
// counted steps so far. Both widths are multiplied by confidence_scale.
struct Ucrl2Params {
    double delta = 0.05;
    double multiplier = 10.0;
    double confidence_scale = 0.1;
    double reward_range = 1.0;
    double reward_max = 1.0;  // optimistic rewards are clipped here
};

struct Ucrl2Widths {
    double reward = 0.0;
    double transition = 0.0;
};

Ucrl2Widths ucrl2_widths(const agents::TabularCounts& counts, int t, int x, int a, const Ucrl2Params& p);

// Optimistic action values from extended value iteration over the
// confidence sets around the empirical model.
envs::QTable ucrl2_episode_policy(const agents::TabularCounts& counts, const Ucrl2Params& p);

// Maximizes p . v over the L1 ball of radius d around p_hat on the simplex.
void optimistic_transition(std::span<const double> p_hat, std::span<const double> v, double d, std::span<double> out);

class Ucrl2Agent : public core::Agent {
public:
    Ucrl2Agent(int horizon, int num_states, int num_actions, Ucrl2Params p = {});
    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override { counts_.add(tr, p_.multiplier); }
    void learn_from_buffer(core::Rng&) override { q_ = ucrl2_episode_policy(counts_, p_); }
    bool action_distribution(const core::State& s, std::span<double> out) const override;
    const envs::QTable& q() const { return q_; }

private:
    Ucrl2Params p_;
    agents::TabularCounts counts_;
    envs::QTable q_;
};

}  // namespace rve::baselines
