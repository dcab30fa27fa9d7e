#include "rve/agents/batch_agent.hpp"

#include <array>
#include <stdexcept>

#include "rve/core/action.hpp"

namespace rve::agents {

BatchAgent::BatchAgent(std::shared_ptr<const LinearValueFamily> family, BatchAgentOptions opts)
    : family_(std::move(family)), opts_(std::move(opts)), buffer_(opts_.capacity) {
    if (!family_) throw std::invalid_argument("null value family");
    if (family_->num_actions() > 16) throw std::invalid_argument("batch agent supports at most 16 actions");
    opts_.params.validate(family_->dim());
    theta_ = opts_.params.prior_mean_or_zero(family_->dim());
}

void BatchAgent::update_buffer(const core::Transition& tr) {
    auto evicted = buffer_.push(tr);
    if (evicted) data_.remove(*evicted);
    data_.add(tr);
}

void BatchAgent::learn_from_buffer(core::Rng& rng) {
    const int D = family_->dim();
    std::vector<WeightedGroup> inputs;
    Eigen::VectorXd center;
    switch (opts_.mode) {
        case LearnMode::lsvi:
            inputs = unperturbed(data_);
            center = opts_.params.prior_mean_or_zero(D);
            break;
        case LearnMode::gaussian:
            center = sample_prior(opts_.params, D, rng);
            inputs = gaussian_grouped(data_, opts_.params.noise_var, rng);
            break;
        case LearnMode::bootstrap:
            center = sample_prior(opts_.params, D, rng);
            inputs = bootstrap_grouped(data_, rng);
            break;
    }
    instrument_ = {};
    theta_ = solve_value_iteration(*family_, data_, inputs, opts_.params, center, SolveRoute::automatic, &instrument_);
}

int BatchAgent::act(const core::State& s, core::Rng& rng) {
    std::array<double, 16> q{};
    std::span<double> row(q.data(), family_->num_actions());
    family_->q_row(theta_, s, row);
    switch (opts_.rule) {
        case ActionRule::greedy: return core::greedy_action(row, rng);
        case ActionRule::epsilon_greedy: return core::epsilon_greedy_action(row, opts_.epsilon, rng);
        case ActionRule::boltzmann: return core::boltzmann_action(row, opts_.eta, rng);
    }
    return 0;
}

bool BatchAgent::action_distribution(const core::State& s, std::span<double> out) const {
    std::array<double, 16> q{};
    std::span<double> row(q.data(), family_->num_actions());
    family_->q_row(theta_, s, row);
    switch (opts_.rule) {
        case ActionRule::greedy: core::greedy_distribution(row, out); break;
        case ActionRule::epsilon_greedy: core::epsilon_greedy_distribution(row, opts_.epsilon, out); break;
        case ActionRule::boltzmann: core::boltzmann_distribution(row, opts_.eta, out); break;
    }
    return true;
}

}  // namespace rve::agents
