#pragma once

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::envs {

// Finite-horizon MDP whose per-step outcome is a joint (next state, reward)
// with binary reward. Outcome index o = r * X + x'.
struct TabularMdp {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> outcome_probs;  // [t][x][a][o], o in [0, 2X)
    std::vector<double> initial;        // [x]

    int num_outcomes() const { return 2 * num_states; }
    std::size_t sa(int t, int x, int a) const {
        return (static_cast<std::size_t>(t) * num_states + x) * num_actions + a;
    }
    const double* outcomes(int t, int x, int a) const { return outcome_probs.data() + sa(t, x, a) * num_outcomes(); }
    double* outcomes(int t, int x, int a) { return outcome_probs.data() + sa(t, x, a) * num_outcomes(); }

    void validate(double tol = 1e-12) const;
    FiniteMdp to_finite() const;

    // {"format":"rve.tabular_mdp","version":1,"horizon","num_states","num_actions",
    //  "initial":[X],"outcome_probs":[flat row-major t,x,a,o]}
    nlohmann::json to_json() const;
    static TabularMdp from_json(const nlohmann::json& j);
};

// alpha0 of length 2X is shared by every (t, x, a); length H*X*A*2X gives one
// vector per (t, x, a). Every vector must sum to the same beta >= 2.
TabularMdp sample_dirichlet_mdp(int horizon, int num_states, int num_actions, std::span<const double> alpha0,
                                core::Rng& rng);

std::vector<double> sample_dirichlet(std::span<const double> alpha, core::Rng& rng);

class TabularEnv : public core::Environment {
public:
    explicit TabularEnv(TabularMdp mdp);

    core::State reset(core::Rng& rng) override;
    core::StepResult step(int action, core::Rng& rng) override;
    int num_actions() const override { return mdp_.num_actions; }
    const FiniteMdp* planning_model() const override { return &finite_; }

    const TabularMdp& mdp() const { return mdp_; }

private:
    TabularMdp mdp_;
    FiniteMdp finite_;
    int t_ = 0;
    int x_ = 0;
    bool done_ = true;
};

}  // namespace rve::envs
