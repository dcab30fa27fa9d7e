#include "rve/agents/tabular.hpp"

#include <cmath>
#include <stdexcept>

#include "rve/core/action.hpp"

namespace rve::agents {

TabularCounts::TabularCounts(int h, int x, int a)
    : horizon(h),
      num_states(x),
      num_actions(a),
      visits(std::size_t(h) * x * a, 0.0),
      reward_sum(visits.size(), 0.0),
      reward_sq(visits.size(), 0.0),
      next_counts(visits.size() * x, 0.0),
      outcome_counts(visits.size() * 2 * x, 0.0) {
    if (h < 1 || x < 1 || a < 1) throw std::invalid_argument("bad tabular shape");
}

void TabularCounts::add(const core::Transition& tr, double multiplier) {
    const auto& s = tr.old_state;
    if (s.t < 0 || s.t >= horizon || s.x < 0 || s.x >= num_states || tr.action < 0 || tr.action >= num_actions)
        throw std::out_of_range("transition outside the tabular shape");
    const std::size_t i = sa(s.t, s.x, tr.action);
    visits[i] += multiplier;
    reward_sum[i] += multiplier * tr.reward;
    reward_sq[i] += multiplier * tr.reward * tr.reward;
    int next = 0;
    if (tr.new_state) {
        next = tr.new_state->x;
        if (next < 0 || next >= num_states) throw std::out_of_range("next state outside the tabular shape");
        next_counts[i * num_states + next] += multiplier;
    }
    if (tr.reward == 0.0 || tr.reward == 1.0)
        outcome_counts[i * 2 * num_states + int(tr.reward) * num_states + next] += multiplier;
    else
        binary_rewards = false;
}

BellmanMoments tabular_rlsvi_moments(const std::vector<double>& v_next, const TabularCounts& c, int t,
                                     const TabularRlsviParams& p) {
    if (!(p.noise_var > 0.0) || !(p.prior_var > 0.0)) throw std::invalid_argument("v and lambda must be positive");
    const int X = c.num_states, A = c.num_actions;
    BellmanMoments m{std::vector<double>(std::size_t(X) * A), std::vector<double>(std::size_t(X) * A)};
    for (int x = 0; x < X; ++x)
        for (int a = 0; a < A; ++a) {
            const std::size_t i = c.sa(t, x, a);
            const double n = c.visits[i];
            double sum = c.reward_sum[i];
            if (!v_next.empty()) {
                const double* nc = c.next_counts.data() + i * X;
                for (int y = 0; y < X; ++y) sum += nc[y] * v_next[y];
            }
            const double var = p.noise_var / (n + p.noise_var / p.prior_var);
            m.variance[std::size_t(x) * A + a] = var;
            m.mean[std::size_t(x) * A + a] = var * (p.prior_mean / p.prior_var + sum / p.noise_var);
        }
    return m;
}

std::vector<double> tabular_rlsvi_bellman(const std::vector<double>& q_next, const TabularCounts& c, int t,
                                          const TabularRlsviParams& p, core::Rng& rng) {
    const int X = c.num_states, A = c.num_actions;
    std::vector<double> v_next;
    if (!q_next.empty()) {
        if (q_next.size() != std::size_t(X) * A) throw std::invalid_argument("q_next has wrong size");
        v_next.resize(X);
        for (int y = 0; y < X; ++y) {
            double best = q_next[std::size_t(y) * A];
            for (int a = 1; a < A; ++a) best = std::max(best, q_next[std::size_t(y) * A + a]);
            v_next[y] = best;
        }
    }
    auto m = tabular_rlsvi_moments(v_next, c, t, p);
    for (std::size_t i = 0; i < m.mean.size(); ++i) m.mean[i] += std::sqrt(m.variance[i]) * core::std_normal(rng);
    return m.mean;
}

TabularRlsviAgent::TabularRlsviAgent(int horizon, int num_states, int num_actions, TabularRlsviParams p)
    : p_(p), counts_(horizon, num_states, num_actions), q_(horizon, num_states, num_actions) {}

void TabularRlsviAgent::learn_from_buffer(core::Rng& rng) {
    const int H = counts_.horizon, X = counts_.num_states, A = counts_.num_actions;
    std::vector<double> next;
    for (int t = H - 1; t >= 0; --t) {
        auto cur = tabular_rlsvi_bellman(next, counts_, t, p_, rng);
        std::copy(cur.begin(), cur.end(), q_.q.begin() + std::size_t(t) * X * A);
        next = std::move(cur);
    }
}

int TabularRlsviAgent::act(const core::State& s, core::Rng& rng) { return core::greedy_action(q_.row(s.t, s.x), rng); }

bool TabularRlsviAgent::action_distribution(const core::State& s, std::span<double> out) const {
    core::greedy_distribution(q_.row(s.t, s.x), out);
    return true;
}

envs::FiniteMdp expected_mdp(const TabularCounts& c) {
    const int H = c.horizon, X = c.num_states, A = c.num_actions;
    envs::FiniteMdp m(H, X, A);
    m.initial.assign(X, 1.0 / X);
    for (int t = 0; t < H; ++t)
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                const std::size_t i = c.sa(t, x, a);
                const double n = c.visits[i];
                double* p = m.p(t, x, a);
                if (n > 0) {
                    m.r(t, x, a) = c.reward_sum[i] / n;
                    double moved = 0.0;
                    for (int y = 0; y < X; ++y) moved += c.next_counts[i * X + y];
                    if (moved > 0)
                        for (int y = 0; y < X; ++y) p[y] = c.next_counts[i * X + y] / moved;
                    else
                        for (int y = 0; y < X; ++y) p[y] = 1.0 / X;
                } else {
                    m.r(t, x, a) = 0.0;
                    for (int y = 0; y < X; ++y) p[y] = 1.0 / X;
                }
            }
    return m;
}

envs::QTable pure_exploitation_learn(const TabularCounts& counts) { return envs::value_iteration(expected_mdp(counts)); }

PureExploitationAgent::PureExploitationAgent(int horizon, int num_states, int num_actions)
    : counts_(horizon, num_states, num_actions), q_(horizon, num_states, num_actions) {}

int PureExploitationAgent::act(const core::State& s, core::Rng& rng) {
    return core::greedy_action(q_.row(s.t, s.x), rng);
}

bool PureExploitationAgent::action_distribution(const core::State& s, std::span<double> out) const {
    core::greedy_distribution(q_.row(s.t, s.x), out);
    return true;
}

}  // namespace rve::agents
