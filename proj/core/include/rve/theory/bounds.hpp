#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "rve/core/rng.hpp"

namespace rve::theory {

struct Visit {
    int t = 0;
    int x = 0;
    int a = 0;
};

// one inner vector per episode
using VisitStream = std::vector<std::vector<Visit>>;

struct VisitSumReport {
    double lhs1 = 0.0;  // sum 1 / (beta + n)
    double rhs1 = 0.0;  // H |X| |A| log(1 + L / (|X| |A|))
    double lhs2 = 0.0;  // sum (beta + n)^(-1/2)
    double rhs2 = 0.0;  // 2 sqrt(H^2 |X| |A| L)
    bool holds1 = false;
    bool holds2 = false;

    nlohmann::json to_json() const;
};

// n counts visits to (t, x, a) in earlier episodes only.
VisitSumReport visit_sum_bounds(const VisitStream& stream, double beta, int horizon, int num_states, int num_actions);

// Uniformly random episodes of length H, for property checks.
VisitStream random_visit_stream(int episodes, int horizon, int num_states, int num_actions, core::Rng& rng);

struct GaussianMaxReport {
    int n = 0;
    double max_mean = 0.0;  // E[max_i Z_i], Z standard normal
    double max_se = 0.0;
    double max_bound = 0.0;  // sqrt(2 log n)
    double weighted_mean = 0.0;  // E[X_J], X_i = sigma_i Z_i, J = argmax X_i
    double weighted_se = 0.0;
    double weighted_bound = 0.0;  // sqrt(2 log n E[sigma_J^2])
    bool holds = false;           // both within 3 standard errors

    nlohmann::json to_json() const;
};

GaussianMaxReport gaussian_max_bound_check(const std::vector<double>& sigmas, int num_draws, core::Rng& rng);

}  // namespace rve::theory
