#pragma once

#include <vector>

#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::agents {

// Per-(t, x, a) sufficient statistics of observed transitions in a finite
// environment. Observations can be counted with a multiplier.
struct TabularCounts {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> visits;          // [t][x][a]
    std::vector<double> reward_sum;      // [t][x][a]
    std::vector<double> reward_sq;       // [t][x][a]
    std::vector<double> next_counts;     // [t][x][a][x']
    std::vector<double> outcome_counts;  // [t][x][a][o], o = r * X + x' (x' = 0 on termination)
    bool binary_rewards = true;

    TabularCounts() = default;
    TabularCounts(int h, int x, int a);
    void add(const core::Transition& tr, double multiplier = 1.0);

    std::size_t sa(int t, int x, int a) const { return (std::size_t(t) * num_states + x) * num_actions + a; }
};

struct TabularRlsviParams {
    double noise_var = 1.0;   // v
    double prior_var = 1.0;   // lambda
    double prior_mean = 0.0;  // theta bar, same for every entry
};

struct BellmanMoments {
    std::vector<double> mean;      // [x][a]
    std::vector<double> variance;  // [x][a]
};

// Mean and variance of the randomized backup at period t given the next
// period's values (empty v_next at the last period).
BellmanMoments tabular_rlsvi_moments(const std::vector<double>& v_next, const TabularCounts& counts, int t,
                                     const TabularRlsviParams& p);

// One randomized backup: returns Q_t as an [x][a] table. q_next is the
// [x'][a'] table of period t+1, or empty at the last period.
std::vector<double> tabular_rlsvi_bellman(const std::vector<double>& q_next, const TabularCounts& counts, int t,
                                          const TabularRlsviParams& p, core::Rng& rng);

class TabularRlsviAgent : public core::Agent {
public:
    TabularRlsviAgent(int horizon, int num_states, int num_actions, TabularRlsviParams p);

    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override { counts_.add(tr); }
    void learn_from_buffer(core::Rng& rng) override;
    bool action_distribution(const core::State& s, std::span<double> out) const override;

    const envs::QTable& q() const { return q_; }
    const TabularCounts& counts() const { return counts_; }

private:
    TabularRlsviParams p_;
    TabularCounts counts_;
    envs::QTable q_;
};

// Best-guess MDP from counts: empirical means where visited, reward 0 and a
// uniform next state where not.
envs::FiniteMdp expected_mdp(const TabularCounts& counts);

// Greedy-policy Q table of the best-guess MDP.
envs::QTable pure_exploitation_learn(const TabularCounts& counts);

class PureExploitationAgent : public core::Agent {
public:
    PureExploitationAgent(int horizon, int num_states, int num_actions);
    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override { counts_.add(tr); }
    void learn_from_buffer(core::Rng&) override { q_ = pure_exploitation_learn(counts_); }
    bool action_distribution(const core::State& s, std::span<double> out) const override;

private:
    TabularCounts counts_;
    envs::QTable q_;
};

}  // namespace rve::agents
