#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rve::envs {

// Finite-horizon MDP with states factored by period: x in [0, X) at each
// t in [0, H). Transitions out of period H-1 end the episode and are ignored.
struct FiniteMdp {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> reward;      // [t][x][a]
    std::vector<double> transition;  // [t][x][a][x']
    std::vector<double> initial;     // [x]

    FiniteMdp() = default;
    FiniteMdp(int h, int x, int a);

    std::size_t sa(int t, int x, int a) const {
        return (static_cast<std::size_t>(t) * num_states + x) * num_actions + a;
    }
    double& r(int t, int x, int a) { return reward[sa(t, x, a)]; }
    double r(int t, int x, int a) const { return reward[sa(t, x, a)]; }
    double* p(int t, int x, int a) { return transition.data() + sa(t, x, a) * num_states; }
    const double* p(int t, int x, int a) const { return transition.data() + sa(t, x, a) * num_states; }

    // throws if any row is off the simplex by more than tol
    void validate(double tol = 1e-9) const;
};

// Action values indexed by period; periods at or beyond H have value 0.
struct QTable {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> q;  // [t][x][a]

    QTable() = default;
    QTable(int h, int x, int a) : horizon(h), num_states(x), num_actions(a), q(std::size_t(h) * x * a, 0.0) {}

    double& at(int t, int x, int a) { return q[(std::size_t(t) * num_states + x) * num_actions + a]; }
    double at(int t, int x, int a) const { return q[(std::size_t(t) * num_states + x) * num_actions + a]; }
    std::span<const double> row(int t, int x) const {
        return {q.data() + (std::size_t(t) * num_states + x) * num_actions, std::size_t(num_actions)};
    }
    std::span<double> row(int t, int x) {
        return {q.data() + (std::size_t(t) * num_states + x) * num_actions, std::size_t(num_actions)};
    }
    double value(int t, int x) const;  // max over actions, 0 past the horizon
};

// Optimal action values. With horizon h < mdp.horizon only the last h
// periods are planned; earlier periods stay 0.
QTable value_iteration(const FiniteMdp& mdp);
QTable value_iteration(const FiniteMdp& mdp, int horizon);

// policy(t, x, probs) fills the action distribution at (t, x).
using PolicyFn = std::function<void(int, int, std::span<double>)>;

// V^pi as a [t][x] table
std::vector<double> policy_evaluation(const FiniteMdp& mdp, const PolicyFn& policy);

// Greedy policy (uniform over ties) of a Q table.
PolicyFn greedy_policy(const QTable& q);

double initial_value(const FiniteMdp& mdp, std::span<const double> v_table);

}  // namespace rve::envs
