#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "rve/envs/planning.hpp"

namespace rve::theory {

struct BellmanGapReport {
    // per initial state x
    std::vector<double> lhs;  // Q_0(x, pi_0(x)) - V^pi_0(x)
    std::vector<double> rhs;  // E_pi[sum_t (Q_t - F_t Q_{t+1})(x_t, a_t)]
    double gap = 0.0;         // max_x |lhs - rhs|

    nlohmann::json to_json() const;
};

// q holds Q_0 .. Q_H (horizon H + 1) and its last period must be zero. pi is
// greedy for q with uniform tie-breaking. Both sides are computed exactly by
// forward recursion over state occupancies.
BellmanGapReport planning_bellman_gap(const envs::FiniteMdp& mdp, const envs::QTable& q);

// Q_0 .. Q_H with Q_t = Q*_t for t < H and Q_H = 0.
envs::QTable padded_optimal_q(const envs::FiniteMdp& mdp);

}  // namespace rve::theory
