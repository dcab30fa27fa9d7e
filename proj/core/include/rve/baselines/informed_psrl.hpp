#pragma once

#include <array>
#include <vector>

#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::baselines {

// PSRL for deep-sea that knows the grid dynamics and costs and is uncertain
// only about the action associations and the chest sign. Unseen associations
// are uniform; the chest cell keeps a joint posterior over (which action is
// right, treasure or bomb) from the rewards seen there.
class InformedDeepSeaPsrl : public core::Agent {
public:
    InformedDeepSeaPsrl(int size_n, double reward_noise_sd);

    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override;
    void learn_from_buffer(core::Rng& rng) override;
    bool action_distribution(const core::State& s, std::span<double> out) const override;

    // posterior over (right action index, treasure) at the chest cell;
    // entry 2 * right + treasure
    std::array<double, 4> chest_posterior() const;
    int known_right(int row, int col) const { return right_[std::size_t(row) * n_ + col]; }  // -1 if unknown

    envs::FiniteMdp sample_mdp(core::Rng& rng) const;

private:
    int n_;
    double noise_sd_;
    std::vector<int> right_;
    std::array<double, 4> chest_loglik_{};
    envs::QTable q_;
};

}  // namespace rve::baselines
