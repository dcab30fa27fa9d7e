#include "rve/core/live.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rve/envs/planning.hpp"

namespace rve::core {

std::vector<double> RegretTrace::cumulative_regret() const {
    std::vector<double> c(per_episode_regret.size());
    std::partial_sum(per_episode_regret.begin(), per_episode_regret.end(), c.begin());
    return c;
}

namespace {

// Exact V^pi(s0) of the agent's current episode policy, or NaN when the
// agent cannot expose its action distribution.
double episode_policy_value(const Agent& agent, const Environment& env, const envs::FiniteMdp& mdp) {
    bool ok = true;
    auto policy = [&](int t, int x, std::span<double> out) {
        if (!ok) return;
        if (!agent.action_distribution(env.state_at(t, x), out)) ok = false;
    };
    auto v = envs::policy_evaluation(mdp, policy);
    if (!ok) return std::numeric_limits<double>::quiet_NaN();
    return envs::initial_value(mdp, v);
}

}  // namespace

RegretTrace live(Agent& agent, Environment& env, int num_episodes, RunStreams& streams, const LiveOptions& opts) {
    if (num_episodes <= 0) throw std::invalid_argument("num_episodes must be positive");
    RegretTrace trace;
    const envs::FiniteMdp* mdp = env.planning_model();
    double v_star = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> v_star_table;
    if (mdp) {
        auto q = envs::value_iteration(*mdp);
        v_star_table.assign(std::size_t(mdp->num_states), 0.0);
        for (int x = 0; x < mdp->num_states; ++x) v_star_table[x] = q.value(0, x);
        v_star = envs::initial_value(*mdp, v_star_table);
    }
    const int num_actions = env.num_actions();

    for (int ep = 0; ep < num_episodes; ++ep) {
        agent.learn_from_buffer(streams.agent);

        double regret = std::numeric_limits<double>::quiet_NaN();
        bool exact = mdp && !opts.realized_regret;
        if (exact) {
            double v_pi = episode_policy_value(agent, env, *mdp);
            if (std::isnan(v_pi))
                exact = false;
            else
                regret = v_star - v_pi;
        }

        EpisodeOutcome outcome;
        State s = env.reset(streams.env);
        State s0 = s;
        for (int t = 0;; ++t) {
            int a = agent.act(s, streams.ties);
            if (a < 0 || a >= num_actions)
                throw std::runtime_error("agent chose invalid action " + std::to_string(a) + " in episode " +
                                         std::to_string(ep) + " at timestep " + std::to_string(t));
            StepResult r;
            try {
                r = env.step(a, streams.env);
            } catch (const std::exception& e) {
                throw std::runtime_error("environment step failed in episode " + std::to_string(ep) +
                                         " at timestep " + std::to_string(t) + ": " + e.what());
            }
            Transition tr{s, a, r.reward, r.next, t};
            agent.update_buffer(tr);
            outcome.return_total += r.reward;
            outcome.transitions.push_back(std::move(tr));
            if (!r.next) break;
            s = *r.next;
        }

        if (!exact && mdp) regret = v_star_table[s0.x] - outcome.return_total;
        trace.per_episode_regret.push_back(regret);
        trace.per_episode_return.push_back(outcome.return_total);
        if (opts.on_episode) opts.on_episode(ep, outcome);
        if (opts.stop && opts.stop(trace)) break;
    }
    return trace;
}

std::optional<int> learning_time(const RegretTrace& trace, double threshold) {
    double acc = 0.0;
    const auto& r = trace.per_episode_regret;
    for (std::size_t i = 0; i < r.size(); ++i) {
        acc += r[i];
        std::size_t L = i + 1;
        if (L > 1 && acc / static_cast<double>(L) <= threshold) return static_cast<int>(L);
    }
    return std::nullopt;
}

}  // namespace rve::core
