#include "rve/theory/bellman_gap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rve::theory {

nlohmann::json BellmanGapReport::to_json() const { return {{"lhs", lhs}, {"rhs", rhs}, {"gap", gap}}; }

envs::QTable padded_optimal_q(const envs::FiniteMdp& mdp) {
    auto qs = envs::value_iteration(mdp);
    envs::QTable q(mdp.horizon + 1, mdp.num_states, mdp.num_actions);
    std::copy(qs.q.begin(), qs.q.end(), q.q.begin());
    return q;
}

BellmanGapReport planning_bellman_gap(const envs::FiniteMdp& mdp, const envs::QTable& q) {
    const int H = mdp.horizon, X = mdp.num_states, A = mdp.num_actions;
    if (q.horizon != H + 1 || q.num_states != X || q.num_actions != A)
        throw std::invalid_argument("Q sequence must hold periods 0..H for this MDP");
    for (int x = 0; x < X; ++x)
        for (int a = 0; a < A; ++a)
            if (q.at(H, x, a) != 0.0) throw std::invalid_argument("terminal Q table must be identically zero");

    // pi_t(a | x): uniform over the argmax set of Q_t(x, .)
    std::vector<double> pi(std::size_t(H) * X * A, 0.0);
    auto pi_at = [&](int t, int x) { return pi.data() + (std::size_t(t) * X + x) * A; };
    for (int t = 0; t < H; ++t)
        for (int x = 0; x < X; ++x) {
            auto row = q.row(t, x);
            const double best = *std::max_element(row.begin(), row.end());
            int ties = 0;
            for (double v : row) ties += v == best;
            for (int a = 0; a < A; ++a) pi_at(t, x)[a] = row[a] == best ? 1.0 / ties : 0.0;
        }

    // Bellman residual (Q_t - F_t Q_{t+1})(x, a) with max over Q_{t+1}
    std::vector<double> resid(std::size_t(H) * X * A);
    for (int t = 0; t < H; ++t)
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                double backup = mdp.r(t, x, a);
                if (t + 1 < H) {
                    const double* p = mdp.p(t, x, a);
                    for (int y = 0; y < X; ++y) backup += p[y] * q.value(t + 1, y);
                }
                resid[mdp.sa(t, x, a)] = q.at(t, x, a) - backup;
            }

    auto v_pi = envs::policy_evaluation(mdp, [&](int t, int x, std::span<double> out) {
        std::copy(pi_at(t, x), pi_at(t, x) + A, out.begin());
    });

    BellmanGapReport rep;
    rep.lhs.resize(std::size_t(X));
    rep.rhs.resize(std::size_t(X));
    std::vector<double> occ(static_cast<std::size_t>(X)), next(static_cast<std::size_t>(X));
    for (int x0 = 0; x0 < X; ++x0) {
        double q0 = 0.0;
        for (int a = 0; a < A; ++a) q0 += pi_at(0, x0)[a] * q.at(0, x0, a);
        rep.lhs[x0] = q0 - v_pi[std::size_t(x0)];

        std::fill(occ.begin(), occ.end(), 0.0);
        occ[std::size_t(x0)] = 1.0;
        double rhs = 0.0;
        for (int t = 0; t < H; ++t) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int x = 0; x < X; ++x) {
                if (occ[std::size_t(x)] == 0.0) continue;
                for (int a = 0; a < A; ++a) {
                    const double w = occ[std::size_t(x)] * pi_at(t, x)[a];
                    if (w == 0.0) continue;
                    rhs += w * resid[mdp.sa(t, x, a)];
                    if (t + 1 < H) {
                        const double* p = mdp.p(t, x, a);
                        for (int y = 0; y < X; ++y) next[std::size_t(y)] += w * p[y];
                    }
                }
            }
            std::swap(occ, next);
        }
        rep.rhs[x0] = rhs;
        rep.gap = std::max(rep.gap, std::abs(rep.lhs[x0] - rhs));
    }
    return rep;
}

}  // namespace rve::theory
