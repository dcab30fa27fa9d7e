#pragma once

#include <memory>

#include "rve/agents/lsvi.hpp"
#include "rve/core/interfaces.hpp"

namespace rve::agents {

enum class LearnMode { lsvi, gaussian, bootstrap };
enum class ActionRule { greedy, epsilon_greedy, boltzmann };

struct BatchAgentOptions {
    LearnMode mode = LearnMode::gaussian;
    ActionRule rule = ActionRule::greedy;
    double epsilon = 0.1;
    double eta = 0.1;
    RlsviParams params;
    std::optional<std::size_t> capacity;
};

// LSVI / RLSVI agent over a linear family. Learning recomputes the value
// function from the whole buffer each episode.
class BatchAgent : public core::Agent {
public:
    BatchAgent(std::shared_ptr<const LinearValueFamily> family, BatchAgentOptions opts);

    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override;
    void learn_from_buffer(core::Rng& rng) override;
    bool action_distribution(const core::State& s, std::span<double> out) const override;

    const Eigen::VectorXd& theta() const { return theta_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const GroupedData& grouped() const { return data_; }
    const LearnInstrument& last_learn() const { return instrument_; }

private:
    std::shared_ptr<const LinearValueFamily> family_;
    BatchAgentOptions opts_;
    ReplayBuffer buffer_;
    GroupedData data_;
    Eigen::VectorXd theta_;
    LearnInstrument instrument_;
};

}  // namespace rve::agents
