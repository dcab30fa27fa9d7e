#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <nlohmann/json.hpp>
#include <unordered_map>
#include <vector>

#include "rve/core/interfaces.hpp"
#include "rve/deep/encoder.hpp"
#include "rve/deep/td.hpp"

namespace rve::deep {

enum class EnsembleUpdate { none, gaussian, bootstrap };

// K member buffers over one shared transition store. Each member keeps the
// ids of its transitions with its own (possibly perturbed) reward, FIFO with
// the same capacity.
class EnsembleBuffer {
public:
    EnsembleBuffer(int k, std::size_t capacity);

    void update_gaussian(const core::Transition& tr, double v, core::Rng& rng);
    void update_bootstrap(const core::Transition& tr, core::Rng& rng);
    void update_all(const core::Transition& tr);

    int num_members() const { return int(members_.size()); }
    std::size_t capacity() const { return capacity_; }
    std::size_t member_size(int k) const { return members_[k].size(); }
    const core::Transition& transition(int k, std::size_t i) const;
    double reward(int k, std::size_t i) const { return members_[k][i].reward; }
    std::size_t stored() const { return store_.size(); }

    // Uniform without replacement; the whole buffer when it holds <= m.
    std::vector<std::size_t> sample_minibatch(int k, std::size_t m, core::Rng& rng) const;

private:
    struct Entry {
        std::uint64_t id;
        double reward;
    };
    std::uint64_t push_store(const core::Transition& tr);
    void enqueue(int k, std::uint64_t id, double reward);
    void prune();

    std::size_t capacity_;
    std::deque<core::Transition> store_;
    std::uint64_t base_id_ = 0;
    std::vector<std::deque<Entry>> members_;
};

enum class ExploreRule { greedy, epsilon_greedy };

struct EnsembleOptions {
    int ensemble_size = 20;
    EnsembleUpdate update = EnsembleUpdate::bootstrap;
    double noise_var = 1.0;  // gaussian update only
    std::vector<int> hidden = {50, 50};
    double gamma = 0.99;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::sgd;
    bool mean_loss = false;
    std::size_t minibatch = 128;
    int sgd_steps_per_learn = 1;
    std::size_t capacity = 100000;
    bool prior_net = true;
    double prior_scale = 1.0;
    double reg_weight = 0.0;   // explicit pull toward each member's initial parameters
    int target_period = 0;     // 0: the current parameters are their own target
    ExploreRule rule = ExploreRule::greedy;
    double epsilon_start = 1.0;
    double epsilon_end = 0.0;
    int epsilon_anneal_episodes = 1;
    int threads = 1;

    void validate() const;
};

// Ensemble RLSVI over prior-network pairs. With K = 1, no perturbation, no
// prior network and epsilon-greedy actions this is plain DQN-style TD.
class EnsembleRlsviAgent : public core::Agent {
public:
    EnsembleRlsviAgent(std::shared_ptr<const InputEncoder> encoder, int num_actions, EnsembleOptions opts,
                       std::uint64_t seed);

    int act(const core::State& s, core::Rng& rng) override;
    void update_buffer(const core::Transition& tr) override;
    void learn_from_buffer(core::Rng& rng) override;
    bool action_distribution(const core::State& s, std::span<double> out) const override;

    Eigen::VectorXd q_values(int member, const core::State& s) const;
    int active_member() const { return active_; }
    int episodes() const { return episodes_; }
    double current_epsilon() const;
    const EnsembleBuffer& buffer() const { return buffer_; }
    const PriorNetPair& member(int k) const { return nets_[k]; }
    const EnsembleOptions& options() const { return opts_; }
    double last_loss(int k) const { return last_loss_[k]; }

    nlohmann::json checkpoint() const;
    void restore(const nlohmann::json& j);

private:
    const SparseEntries& encoded(const core::State& s, SparseEntries& scratch) const;
    void remember(const core::State& s);
    void train_member(int k);

    std::shared_ptr<const InputEncoder> enc_;
    int num_actions_;
    EnsembleOptions opts_;
    MlpShape shape_;
    std::vector<PriorNetPair> nets_;
    std::vector<PriorNetPair> targets_;
    std::vector<MlpParams> anchors_;
    std::vector<AdamState> adam_;
    std::vector<core::Rng> member_rng_;
    core::Rng buffer_rng_;
    EnsembleBuffer buffer_;
    std::vector<double> last_loss_;
    std::vector<long> steps_;
    int active_ = 0;
    int episodes_ = 0;

    // finite-state caches filled as states are seen
    std::unordered_map<std::int64_t, SparseEntries> inputs_;
    std::vector<std::unordered_map<std::int64_t, Eigen::VectorXd>> prior_cache_;
};

EnsembleUpdate parse_ensemble_update(const std::string& s);
std::string to_string(EnsembleUpdate u);

}  // namespace rve::deep
