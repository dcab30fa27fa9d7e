#include "rve/deep/ensemble.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "rve/core/action.hpp"

namespace rve::deep {

EnsembleUpdate parse_ensemble_update(const std::string& s) {
    if (s == "none") return EnsembleUpdate::none;
    if (s == "gaussian") return EnsembleUpdate::gaussian;
    if (s == "bootstrap") return EnsembleUpdate::bootstrap;
    throw std::invalid_argument("unknown ensemble update '" + s + "'");
}

std::string to_string(EnsembleUpdate u) {
    switch (u) {
        case EnsembleUpdate::none: return "none";
        case EnsembleUpdate::gaussian: return "gaussian";
        case EnsembleUpdate::bootstrap: return "bootstrap";
    }
    return "?";
}

EnsembleBuffer::EnsembleBuffer(int k, std::size_t capacity) : capacity_(capacity), members_(std::size_t(k)) {
    if (k < 1) throw std::invalid_argument("ensemble needs at least one member");
    if (capacity < 1) throw std::invalid_argument("buffer capacity must be positive");
}

std::uint64_t EnsembleBuffer::push_store(const core::Transition& tr) {
    store_.push_back(tr);
    return base_id_ + store_.size() - 1;
}

void EnsembleBuffer::enqueue(int k, std::uint64_t id, double reward) {
    auto& m = members_[k];
    m.push_back({id, reward});
    if (m.size() > capacity_) m.pop_front();
}

void EnsembleBuffer::prune() {
    const std::uint64_t next = base_id_ + store_.size();
    std::uint64_t keep = next;
    for (const auto& m : members_)
        if (!m.empty()) keep = std::min(keep, m.front().id);
    while (base_id_ < keep) {
        store_.pop_front();
        ++base_id_;
    }
}

void EnsembleBuffer::update_gaussian(const core::Transition& tr, double v, core::Rng& rng) {
    if (!(v > 0.0)) throw std::invalid_argument("noise variance must be positive");
    const auto id = push_store(tr);
    const double sd = std::sqrt(v);
    for (int k = 0; k < num_members(); ++k) enqueue(k, id, tr.reward + sd * core::std_normal(rng));
    prune();
}

void EnsembleBuffer::update_bootstrap(const core::Transition& tr, core::Rng& rng) {
    const auto id = push_store(tr);
    for (int k = 0; k < num_members(); ++k)
        if (rng() & 1u) enqueue(k, id, tr.reward);
    prune();
}

void EnsembleBuffer::update_all(const core::Transition& tr) {
    const auto id = push_store(tr);
    for (int k = 0; k < num_members(); ++k) enqueue(k, id, tr.reward);
    prune();
}

const core::Transition& EnsembleBuffer::transition(int k, std::size_t i) const {
    return store_[members_[k][i].id - base_id_];
}

std::vector<std::size_t> EnsembleBuffer::sample_minibatch(int k, std::size_t m, core::Rng& rng) const {
    const std::size_t n = members_[k].size();
    std::vector<std::size_t> out;
    if (n <= m) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = i;
        return out;
    }
    // Floyd's algorithm; insertion order kept for reproducibility
    out.reserve(m);
    std::unordered_set<std::size_t> seen;
    seen.reserve(2 * m);
    for (std::size_t j = n - m; j < n; ++j) {
        std::size_t t = core::uniform_index(rng, j + 1);
        if (!seen.insert(t).second) {
            t = j;
            seen.insert(t);
        }
        out.push_back(t);
    }
    return out;
}

void EnsembleOptions::validate() const {
    if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be positive");
    if (update == EnsembleUpdate::gaussian && !(noise_var > 0.0)) throw std::invalid_argument("noise_var must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be non-negative");
    if (minibatch < 1 || capacity < 1) throw std::invalid_argument("minibatch and capacity must be positive");
    if (sgd_steps_per_learn < 0 || target_period < 0) throw std::invalid_argument("step counts must be non-negative");
    if (reg_weight < 0.0) throw std::invalid_argument("reg_weight must be non-negative");
    if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0)
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (epsilon_anneal_episodes < 1) throw std::invalid_argument("epsilon_anneal_episodes must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be positive");
}

EnsembleRlsviAgent::EnsembleRlsviAgent(std::shared_ptr<const InputEncoder> encoder, int num_actions,
                                       EnsembleOptions opts, std::uint64_t seed)
    : enc_(std::move(encoder)),
      num_actions_(num_actions),
      opts_(std::move(opts)),
      buffer_rng_(core::child_stream(seed, "ensemble_buffer")),
      buffer_(opts_.ensemble_size, opts_.capacity) {
    if (!enc_) throw std::invalid_argument("null encoder");
    if (num_actions < 1) throw std::invalid_argument("need at least one action");
    opts_.validate();
    shape_ = MlpShape{enc_->input_dim(), opts_.hidden, num_actions};
    shape_.validate();
    const int K = opts_.ensemble_size;
    auto init = core::child_stream(seed, "ensemble_init");
    for (int k = 0; k < K; ++k) {
        nets_.push_back(PriorNetPair::init(shape_, init, opts_.prior_net, opts_.prior_scale));
        anchors_.push_back(nets_.back().trainable);
        if (opts_.optimizer == Optimizer::adam) adam_.push_back(AdamState::for_shape(shape_));
        member_rng_.push_back(core::child_stream(seed, "ensemble_member_" + std::to_string(k)));
    }
    if (opts_.target_period > 0) targets_ = nets_;
    last_loss_.assign(K, 0.0);
    steps_.assign(K, 0);
    prior_cache_.resize(K);
}

const SparseEntries& EnsembleRlsviAgent::encoded(const core::State& s, SparseEntries& scratch) const {
    if (enc_->finite_states()) {
        auto it = inputs_.find(s.key());
        if (it != inputs_.end()) return it->second;
    }
    enc_->encode(s, scratch);
    return scratch;
}

void EnsembleRlsviAgent::remember(const core::State& s) {
    if (!enc_->finite_states()) return;
    auto [it, inserted] = inputs_.try_emplace(s.key());
    if (!inserted) return;
    enc_->encode(s, it->second);
    for (int k = 0; k < opts_.ensemble_size; ++k) {
        const auto& n = nets_[k];
        prior_cache_[k][s.key()] = n.has_prior ? Eigen::VectorXd(n.prior_scale * forward_sparse(n.prior, it->second))
                                               : Eigen::VectorXd::Zero(num_actions_);
    }
}

void EnsembleRlsviAgent::update_buffer(const core::Transition& tr) {
    remember(tr.old_state);
    if (tr.new_state) remember(*tr.new_state);
    switch (opts_.update) {
        case EnsembleUpdate::none: buffer_.update_all(tr); break;
        case EnsembleUpdate::gaussian: buffer_.update_gaussian(tr, opts_.noise_var, buffer_rng_); break;
        case EnsembleUpdate::bootstrap: buffer_.update_bootstrap(tr, buffer_rng_); break;
    }
}

void EnsembleRlsviAgent::train_member(int k) {
    if (buffer_.member_size(k) == 0) return;
    auto idx = buffer_.sample_minibatch(k, opts_.minibatch, member_rng_[k]);
    const int B = int(idx.size());
    TdBatch batch;
    batch.actions.resize(B);
    batch.rewards.resize(B);
    batch.next_col.assign(B, -1);
    std::vector<const SparseEntries*> cols, next_cols;

    if (enc_->finite_states()) {
        // repeated states share one network column
        const auto& pc = prior_cache_[k];
        std::unordered_map<std::int64_t, int> seen, seen_next;
        std::vector<std::int64_t> keys, next_keys;
        batch.x_col.resize(B);
        for (int j = 0; j < B; ++j) {
            const auto& tr = buffer_.transition(k, idx[j]);
            batch.actions[j] = tr.action;
            batch.rewards[j] = buffer_.reward(k, idx[j]);
            auto [it, fresh] = seen.try_emplace(tr.old_state.key(), int(keys.size()));
            if (fresh) keys.push_back(tr.old_state.key());
            batch.x_col[j] = it->second;
            if (tr.new_state) {
                auto [jt, nfresh] = seen_next.try_emplace(tr.new_state->key(), int(next_keys.size()));
                if (nfresh) next_keys.push_back(tr.new_state->key());
                batch.next_col[j] = jt->second;
            }
        }
        batch.prior_x.resize(num_actions_, Eigen::Index(keys.size()));
        for (std::size_t c = 0; c < keys.size(); ++c) {
            cols.push_back(&inputs_.at(keys[c]));
            batch.prior_x.col(Eigen::Index(c)) = pc.at(keys[c]);
        }
        batch.prior_next.resize(num_actions_, Eigen::Index(next_keys.size()));
        for (std::size_t c = 0; c < next_keys.size(); ++c) {
            next_cols.push_back(&inputs_.at(next_keys[c]));
            batch.prior_next.col(Eigen::Index(c)) = pc.at(next_keys[c]);
        }
        batch.x = make_batch(shape_.input_dim, cols);
        batch.x_next = make_batch(shape_.input_dim, next_cols);
    } else {
        std::vector<SparseEntries> scratch(2 * std::size_t(B));
        for (int j = 0; j < B; ++j) {
            const auto& tr = buffer_.transition(k, idx[j]);
            batch.actions[j] = tr.action;
            batch.rewards[j] = buffer_.reward(k, idx[j]);
            enc_->encode(tr.old_state, scratch[2 * j]);
            cols.push_back(&scratch[2 * j]);
            if (tr.new_state) {
                batch.next_col[j] = int(next_cols.size());
                enc_->encode(*tr.new_state, scratch[2 * j + 1]);
                next_cols.push_back(&scratch[2 * j + 1]);
            }
        }
        batch.x = make_batch(shape_.input_dim, cols);
        batch.x_next = make_batch(shape_.input_dim, next_cols);
    }

    SgdOptions so;
    so.learning_rate = opts_.learning_rate;
    so.gamma = opts_.gamma;
    so.mean_loss = opts_.mean_loss;
    so.reg_weight = opts_.reg_weight;
    so.anchor = &anchors_[k];
    const PriorNetPair& target = opts_.target_period > 0 ? targets_[k] : nets_[k];
    last_loss_[k] = opts_.optimizer == Optimizer::adam ? adam_step(nets_[k], target, batch, so, adam_[k])
                                                       : sgd_step(nets_[k], target, batch, so);
    if (opts_.target_period > 0 && ++steps_[k] % opts_.target_period == 0) targets_[k].trainable = nets_[k].trainable;
    else if (opts_.target_period == 0) ++steps_[k];
}

void EnsembleRlsviAgent::learn_from_buffer(core::Rng& rng) {
    const int K = opts_.ensemble_size;
    auto run = [&](int lo, int hi) {
        for (int k = lo; k < hi; ++k)
            for (int s = 0; s < opts_.sgd_steps_per_learn; ++s) train_member(k);
    };
    const int T = std::min(opts_.threads, K);
    if (T <= 1) {
        run(0, K);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < T; ++t) pool.emplace_back(run, t * K / T, (t + 1) * K / T);
    }
    active_ = int(core::uniform_index(rng, std::uint64_t(K)));
    ++episodes_;
}

Eigen::VectorXd EnsembleRlsviAgent::q_values(int k, const core::State& s) const {
    SparseEntries scratch;
    const auto& x = encoded(s, scratch);
    const auto& n = nets_[k];
    Eigen::VectorXd q = forward_sparse(n.trainable, x);
    if (n.has_prior) {
        auto it = enc_->finite_states() ? prior_cache_[k].find(s.key()) : prior_cache_[k].end();
        if (it != prior_cache_[k].end())
            q += it->second;
        else
            q += n.prior_scale * forward_sparse(n.prior, x);
    }
    return q;
}

double EnsembleRlsviAgent::current_epsilon() const {
    if (opts_.rule != ExploreRule::epsilon_greedy) return 0.0;
    const double e = std::max(0, episodes_ - 1);
    const double frac = std::min(1.0, e / opts_.epsilon_anneal_episodes);
    return opts_.epsilon_start + (opts_.epsilon_end - opts_.epsilon_start) * frac;
}

int EnsembleRlsviAgent::act(const core::State& s, core::Rng& rng) {
    Eigen::VectorXd q = q_values(active_, s);
    std::span<const double> row(q.data(), std::size_t(q.size()));
    if (opts_.rule == ExploreRule::epsilon_greedy) return core::epsilon_greedy_action(row, current_epsilon(), rng);
    return core::greedy_action(row, rng);
}

bool EnsembleRlsviAgent::action_distribution(const core::State& s, std::span<double> out) const {
    Eigen::VectorXd q = q_values(active_, s);
    std::span<const double> row(q.data(), std::size_t(q.size()));
    if (opts_.rule == ExploreRule::epsilon_greedy)
        core::epsilon_greedy_distribution(row, current_epsilon(), out);
    else
        core::greedy_distribution(row, out);
    return true;
}

nlohmann::json EnsembleRlsviAgent::checkpoint() const {
    nlohmann::json j;
    j["format"] = "rve.ensemble_checkpoint";
    j["version"] = 1;
    j["shape"] = {{"input_dim", shape_.input_dim}, {"hidden", shape_.hidden}, {"num_outputs", shape_.num_outputs}};
    j["has_prior"] = opts_.prior_net;
    j["prior_scale"] = opts_.prior_scale;
    j["active"] = active_;
    j["episodes"] = episodes_;
    j["steps"] = steps_;
    nlohmann::json members = nlohmann::json::array();
    for (int k = 0; k < opts_.ensemble_size; ++k) {
        nlohmann::json m;
        m["trainable"] = nets_[k].trainable.flatten();
        m["prior"] = nets_[k].prior.flatten();
        m["anchor"] = anchors_[k].flatten();
        if (opts_.target_period > 0) m["target"] = targets_[k].trainable.flatten();
        m["rng"] = core::serialize_rng(member_rng_[k]);
        if (opts_.optimizer == Optimizer::adam)
            m["adam"] = {{"m", adam_[k].m.flatten()}, {"v", adam_[k].v.flatten()}, {"steps", adam_[k].steps}};
        members.push_back(std::move(m));
    }
    j["members"] = std::move(members);
    j["buffer_rng"] = core::serialize_rng(buffer_rng_);
    return j;
}

void EnsembleRlsviAgent::restore(const nlohmann::json& j) {
    if (j.value("format", "") != "rve.ensemble_checkpoint") throw std::invalid_argument("not an ensemble checkpoint");
    if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported checkpoint version");
    MlpShape s{j.at("shape").at("input_dim").get<int>(), j.at("shape").at("hidden").get<std::vector<int>>(),
               j.at("shape").at("num_outputs").get<int>()};
    if (!(s == shape_)) throw std::invalid_argument("checkpoint network shape does not match this agent");
    const auto& members = j.at("members");
    if (int(members.size()) != opts_.ensemble_size) throw std::invalid_argument("checkpoint ensemble size mismatch");
    if (j.at("has_prior").get<bool>() != opts_.prior_net) throw std::invalid_argument("checkpoint prior setting mismatch");
    for (int k = 0; k < opts_.ensemble_size; ++k) {
        const auto& m = members[k];
        nets_[k].trainable.unflatten(m.at("trainable").get<std::vector<double>>());
        nets_[k].prior.unflatten(m.at("prior").get<std::vector<double>>());
        nets_[k].prior_scale = j.at("prior_scale").get<double>();
        anchors_[k].unflatten(m.at("anchor").get<std::vector<double>>());
        if (opts_.target_period > 0) targets_[k].trainable.unflatten(m.at("target").get<std::vector<double>>());
        if (opts_.target_period > 0) targets_[k].prior = nets_[k].prior;
        member_rng_[k] = core::deserialize_rng(m.at("rng").get<std::string>());
        if (opts_.optimizer == Optimizer::adam) {
            const auto& a = m.at("adam");
            adam_[k].m.unflatten(a.at("m").get<std::vector<double>>());
            adam_[k].v.unflatten(a.at("v").get<std::vector<double>>());
            adam_[k].steps = a.at("steps").get<long>();
        }
    }
    buffer_rng_ = core::deserialize_rng(j.at("buffer_rng").get<std::string>());
    active_ = j.at("active").get<int>();
    episodes_ = j.at("episodes").get<int>();
    steps_ = j.at("steps").get<std::vector<long>>();
    // cached prior outputs belong to the old prior networks
    inputs_.clear();
    for (auto& c : prior_cache_) c.clear();
}

}  // namespace rve::deep
