#pragma once

#include <Eigen/Dense>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rve/agents/linear_family.hpp"
#include "rve/agents/replay_buffer.hpp"
#include "rve/core/rng.hpp"

namespace rve::agents {

struct RlsviParams {
    int horizon = 1;
    double noise_var = 1.0;  // v
    double prior_var = 1.0;  // lambda
    Eigen::VectorXd prior_mean;  // theta bar; empty means zero

    void validate(int dim) const;
    Eigen::VectorXd prior_mean_or_zero(int dim) const;
};

enum class PerturbMode { gaussian, bootstrap };

// Transitions sharing (s, a, s') collapse into one group holding the count
// and the reward total. Individual rewards are kept only once they differ.
struct TransitionGroup {
    core::State s;
    int action = 0;
    std::optional<core::State> next;
    long count = 0;
    double reward_sum = 0.0;
    double first_reward = 0.0;
    std::vector<double> rewards;  // empty while every reward equals first_reward
};

class GroupedData {
public:
    void add(const core::Transition& tr);
    void remove(const core::Transition& tr);  // FIFO eviction support
    const std::vector<TransitionGroup>& groups() const { return groups_; }
    long total() const { return total_; }
    static GroupedData from(const std::vector<core::Transition>& trs);
    static GroupedData from(const ReplayBuffer& buf);

private:
    struct Key {
        std::int64_t s;
        int a;
        std::int64_t s2;
        bool terminal;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    static Key key_of(const core::Transition& tr);

    std::vector<TransitionGroup> groups_;
    std::unordered_map<Key, int, KeyHash> index_;
    long total_ = 0;
};

// One regression input per group: `weight` copies of the group's (s, a, s')
// with reward total `reward_total` (perturbations already applied).
struct WeightedGroup {
    int group = 0;
    double weight = 0.0;
    double reward_total = 0.0;
};

std::vector<WeightedGroup> unperturbed(const GroupedData& data);
// Gaussian noise drawn at group level: sum of n_g iid N(0, v) is N(0, n_g v).
std::vector<WeightedGroup> gaussian_grouped(const GroupedData& data, double v, core::Rng& rng);
// Multinomial resample of all transitions, drawn group by group.
std::vector<WeightedGroup> bootstrap_grouped(const GroupedData& data, core::Rng& rng);

enum class SolveRoute { iterate, backward_sweep, automatic };

// Records the reward totals consumed by each regression pass.
struct LearnInstrument {
    std::vector<std::vector<double>> rewards_per_pass;
    SolveRoute route_used = SolveRoute::iterate;
};

// H passes of regularized regression onto r + max_a' Q_prev(s', a'),
// centred on `center`. The sweep route is exact when transitions only
// move forward one layer and H covers every layer.
Eigen::VectorXd solve_value_iteration(const LinearValueFamily& family, const GroupedData& data,
                                      const std::vector<WeightedGroup>& inputs, const RlsviParams& params,
                                      const Eigen::VectorXd& center, SolveRoute route = SolveRoute::automatic,
                                      LearnInstrument* instrument = nullptr);

bool backward_sweep_applies(const LinearValueFamily& family, const GroupedData& data, int horizon);

Eigen::VectorXd lsvi_learn(const ReplayBuffer& buffer, const LinearValueFamily& family, const RlsviParams& params);

std::vector<core::Transition> gaussian_perturb(const ReplayBuffer& buffer, double v, core::Rng& rng);
std::vector<core::Transition> bootstrap_perturb(const ReplayBuffer& buffer, core::Rng& rng);

struct RlsviOverride {
    bool zero_noise = false;
    std::optional<Eigen::VectorXd> prior_draw;
};

// Literal route: perturb every stored transition once, draw the prior
// sample once, then run the H regression passes.
Eigen::VectorXd rlsvi_learn(const ReplayBuffer& buffer, const LinearValueFamily& family, const RlsviParams& params,
                            PerturbMode mode, core::Rng& rng, const RlsviOverride* fix = nullptr,
                            LearnInstrument* instrument = nullptr);

Eigen::VectorXd sample_prior(const RlsviParams& params, int dim, core::Rng& rng);

}  // namespace rve::agents
