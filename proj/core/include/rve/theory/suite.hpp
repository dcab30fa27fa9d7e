#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "rve/core/rng.hpp"
#include "rve/envs/planning.hpp"

namespace rve::theory {

// Random rewards in [0, 1) and Dirichlet(1, ..., 1) transitions.
envs::FiniteMdp random_finite_mdp(int horizon, int num_states, int num_actions, core::Rng& rng);

struct TheorySuiteOptions {
    int gap_mdps = 100;
    int dominance_draws = 100000;
    int dirichlet_cases = 50;
    int visit_streams = 1000;
    int max_draws = 100000;
};

struct TheorySuiteResult {
    bool planning_gap = false;
    bool gaussian_order = false;
    bool gaussian_dirichlet = false;
    bool visit_sums = false;
    bool gaussian_max = false;
    nlohmann::json report;

    bool all() const { return planning_gap && gaussian_order && gaussian_dirichlet && visit_sums && gaussian_max; }
};

TheorySuiteResult run_theory_suite(std::uint64_t seed, const TheorySuiteOptions& opts = {});

}  // namespace rve::theory
