#pragma once

#include <vector>

#include "rve/agents/tabular.hpp"
#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::baselines {

enum class RewardModel {
    joint_outcome,  // binary rewards: one Dirichlet over (r, x') pairs
    gaussian,       // Dirichlet transitions, normal rewards with known noise variance
};

struct PosteriorPrior {
    RewardModel model = RewardModel::gaussian;
    // joint_outcome: Dirichlet prior over the 2X outcomes, shared by every (t, x, a)
    std::vector<double> outcome_alpha;
    // gaussian: Dirichlet prior weight per next state; <= 0 means 1/X
    double transition_alpha = 0.0;
    double reward_mean = 0.0;
    double reward_var = 1.0;
    double noise_var = 1.0;
};

// Observation counts plus the prior they update. Every observation is
// counted `multiplier` times.
class PosteriorCounts {
public:
    PosteriorCounts(int horizon, int num_states, int num_actions, PosteriorPrior prior, double multiplier = 1.0);

    void add(const core::Transition& tr) { counts_.add(tr, multiplier_); }
    const agents::TabularCounts& counts() const { return counts_; }
    const PosteriorPrior& prior() const { return prior_; }
    double multiplier() const { return multiplier_; }

    // Posterior Dirichlet parameters of the joint outcome at (t, x, a).
    std::vector<double> outcome_posterior(int t, int x, int a) const;

private:
    agents::TabularCounts counts_;
    PosteriorPrior prior_;
    double multiplier_;
};

envs::FiniteMdp psrl_sample_mdp(const PosteriorCounts& post, core::Rng& rng);

// Greedy action values of one posterior sample.
envs::QTable psrl_episode_policy(const PosteriorCounts& post, core::Rng& rng);

class PsrlAgent : public core::Agent {
public:
    PsrlAgent(int horizon, int num_states, int num_actions, PosteriorPrior prior, double multiplier = 10.0);
    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override { post_.add(tr); }
    void learn_from_buffer(core::Rng& rng) override { q_ = psrl_episode_policy(post_, rng); }
    bool action_distribution(const core::State& s, std::span<double> out) const override;
    const PosteriorCounts& posterior() const { return post_; }

private:
    PosteriorCounts post_;
    envs::QTable q_;
};

}  // namespace rve::baselines
