#include "rve/baselines/ucrl2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rve/core/action.hpp"

namespace rve::baselines {

namespace {

double total_steps(const agents::TabularCounts& c) {
    return std::accumulate(c.visits.begin(), c.visits.end(), 0.0);
}

}  // namespace

Ucrl2Widths ucrl2_widths(const agents::TabularCounts& c, int t, int x, int a, const Ucrl2Params& p) {
    const double S = double(c.horizon) * c.num_states, A = c.num_actions;
    const double steps = std::max(1.0, total_steps(c));
    const double n = std::max(1.0, c.visits[c.sa(t, x, a)]);
    Ucrl2Widths w;
    w.reward = p.confidence_scale * p.reward_range * std::sqrt(7.0 * std::log(2.0 * S * A * steps / p.delta) / (2.0 * n));
    w.transition = p.confidence_scale * std::sqrt(14.0 * S * std::log(2.0 * A * steps / p.delta) / n);
    return w;
}

void optimistic_transition(std::span<const double> p_hat, std::span<const double> v, double d, std::span<double> out) {
    const std::size_t X = p_hat.size();
    std::vector<std::size_t> order(X);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
    std::copy(p_hat.begin(), p_hat.end(), out.begin());
    const std::size_t best = order.front();
    out[best] = std::min(1.0, p_hat[best] + d / 2.0);
    // take the excess mass away from the worst states first
    double excess = std::accumulate(out.begin(), out.end(), 0.0) - 1.0;
    for (std::size_t k = X; k-- > 0 && excess > 0.0;) {
        const std::size_t i = order[k];
        if (i == best) continue;
        const double cut = std::min(out[i], excess);
        out[i] -= cut;
        excess -= cut;
    }
}

envs::QTable ucrl2_episode_policy(const agents::TabularCounts& c, const Ucrl2Params& p) {
    if (!(p.delta > 0.0 && p.delta < 1.0) || !(p.multiplier > 0.0) || !(p.confidence_scale >= 0.0))
        throw std::invalid_argument("bad UCRL2 parameters");
    const int H = c.horizon, X = c.num_states, A = c.num_actions;
    envs::QTable q(H, X, A);
    std::vector<double> v_next(X, 0.0), v_cur(X), p_hat(X), p_opt(X);
    for (int t = H - 1; t >= 0; --t) {
        for (int x = 0; x < X; ++x) {
            for (int a = 0; a < A; ++a) {
                const std::size_t i = c.sa(t, x, a);
                const double n = c.visits[i];
                const auto w = ucrl2_widths(c, t, x, a, p);
                const double r_hat = n > 0 ? c.reward_sum[i] / n : 0.0;
                double val = std::min(p.reward_max, r_hat + w.reward);
                if (t + 1 < H) {
                    double moved = 0.0;
                    for (int y = 0; y < X; ++y) moved += c.next_counts[i * X + y];
                    for (int y = 0; y < X; ++y) p_hat[y] = moved > 0 ? c.next_counts[i * X + y] / moved : 1.0 / X;
                    optimistic_transition(p_hat, v_next, w.transition, p_opt);
                    for (int y = 0; y < X; ++y) val += p_opt[y] * v_next[y];
                }
                q.at(t, x, a) = val;
            }
            v_cur[x] = q.value(t, x);
        }
        v_next.swap(v_cur);
    }
    return q;
}

Ucrl2Agent::Ucrl2Agent(int horizon, int num_states, int num_actions, Ucrl2Params p)
    : p_(p), counts_(horizon, num_states, num_actions), q_(horizon, num_states, num_actions) {}

int Ucrl2Agent::act(const core::State& s, core::Rng& rng) { return core::greedy_action(q_.row(s.t, s.x), rng); }

bool Ucrl2Agent::action_distribution(const core::State& s, std::span<double> out) const {
    core::greedy_distribution(q_.row(s.t, s.x), out);
    return true;
}

}  // namespace rve::baselines
