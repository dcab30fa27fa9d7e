#include "rve/baselines/psrl.hpp"

#include <cmath>
#include <stdexcept>

#include "rve/core/action.hpp"
#include "rve/envs/tabular_mdp.hpp"

namespace rve::baselines {

PosteriorCounts::PosteriorCounts(int horizon, int num_states, int num_actions, PosteriorPrior prior, double multiplier)
    : counts_(horizon, num_states, num_actions), prior_(std::move(prior)), multiplier_(multiplier) {
    if (!(multiplier > 0.0)) throw std::invalid_argument("observation multiplier must be positive");
    if (prior_.model == RewardModel::joint_outcome) {
        if (prior_.outcome_alpha.size() != std::size_t(2 * num_states))
            throw std::invalid_argument("joint outcome prior needs 2X entries");
        for (double a : prior_.outcome_alpha)
            if (!(a > 0.0)) throw std::invalid_argument("Dirichlet prior entries must be positive");
    } else {
        if (!(prior_.reward_var > 0.0) || !(prior_.noise_var > 0.0))
            throw std::invalid_argument("reward prior and noise variances must be positive");
        if (prior_.transition_alpha <= 0.0) prior_.transition_alpha = 1.0 / num_states;
    }
}

std::vector<double> PosteriorCounts::outcome_posterior(int t, int x, int a) const {
    if (prior_.model != RewardModel::joint_outcome) throw std::logic_error("not a joint outcome posterior");
    if (!counts_.binary_rewards) throw std::runtime_error("joint outcome posterior needs rewards in {0, 1}");
    const int O = 2 * counts_.num_states;
    std::vector<double> alpha = prior_.outcome_alpha;
    const double* c = counts_.outcome_counts.data() + counts_.sa(t, x, a) * O;
    for (int o = 0; o < O; ++o) alpha[o] += c[o];
    return alpha;
}

envs::FiniteMdp psrl_sample_mdp(const PosteriorCounts& post, core::Rng& rng) {
    const auto& c = post.counts();
    const auto& pr = post.prior();
    const int H = c.horizon, X = c.num_states, A = c.num_actions;
    envs::FiniteMdp m(H, X, A);
    m.initial.assign(X, 1.0 / X);
    std::vector<double> alpha(X);
    for (int t = 0; t < H; ++t)
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                double* p = m.p(t, x, a);
                if (pr.model == RewardModel::joint_outcome) {
                    auto w = envs::sample_dirichlet(post.outcome_posterior(t, x, a), rng);
                    double r = 0.0;
                    for (int y = 0; y < X; ++y) {
                        r += w[X + y];
                        p[y] = w[y] + w[X + y];
                    }
                    m.r(t, x, a) = r;
                    continue;
                }
                const std::size_t i = c.sa(t, x, a);
                const double prec = 1.0 / pr.reward_var + c.visits[i] / pr.noise_var;
                const double mean = (pr.reward_mean / pr.reward_var + c.reward_sum[i] / pr.noise_var) / prec;
                m.r(t, x, a) = mean + std::sqrt(1.0 / prec) * core::std_normal(rng);
                if (t + 1 == H) {
                    for (int y = 0; y < X; ++y) p[y] = 1.0 / X;
                    continue;
                }
                for (int y = 0; y < X; ++y) alpha[y] = pr.transition_alpha + c.next_counts[i * X + y];
                auto w = envs::sample_dirichlet(alpha, rng);
                std::copy(w.begin(), w.end(), p);
            }
    return m;
}

envs::QTable psrl_episode_policy(const PosteriorCounts& post, core::Rng& rng) {
    return envs::value_iteration(psrl_sample_mdp(post, rng));
}

PsrlAgent::PsrlAgent(int horizon, int num_states, int num_actions, PosteriorPrior prior, double multiplier)
    : post_(horizon, num_states, num_actions, std::move(prior), multiplier), q_(horizon, num_states, num_actions) {}

int PsrlAgent::act(const core::State& s, core::Rng& rng) { return core::greedy_action(q_.row(s.t, s.x), rng); }

bool PsrlAgent::action_distribution(const core::State& s, std::span<double> out) const {
    core::greedy_distribution(q_.row(s.t, s.x), out);
    return true;
}

}  // namespace rve::baselines
