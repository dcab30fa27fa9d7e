#include "rve/agents/lsvi.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rve/regress/ridge.hpp"

namespace rve::agents {

void RlsviParams::validate(int dim) const {
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (!(noise_var > 0.0) || !(prior_var > 0.0)) throw std::invalid_argument("v and lambda must be positive");
    if (prior_mean.size() != 0 && prior_mean.size() != dim) throw std::invalid_argument("prior mean has wrong length");
}

Eigen::VectorXd RlsviParams::prior_mean_or_zero(int dim) const {
    return prior_mean.size() == 0 ? Eigen::VectorXd::Zero(dim) : prior_mean;
}

std::size_t GroupedData::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.s) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.s2) + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.a * 2 + k.terminal) + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
}

GroupedData::Key GroupedData::key_of(const core::Transition& tr) {
    if (!tr.old_state.finite() || (tr.new_state && !tr.new_state->finite()))
        throw std::invalid_argument("batch learners need finite state handles");
    return Key{tr.old_state.key(), tr.action, tr.new_state ? tr.new_state->key() : 0, !tr.new_state.has_value()};
}

void GroupedData::add(const core::Transition& tr) {
    Key k = key_of(tr);
    auto [it, inserted] = index_.try_emplace(k, static_cast<int>(groups_.size()));
    if (inserted) {
        TransitionGroup g;
        g.s = tr.old_state;
        g.action = tr.action;
        g.next = tr.new_state;
        g.first_reward = tr.reward;
        groups_.push_back(std::move(g));
    }
    auto& g = groups_[it->second];
    if (g.count == 0) {
        g.first_reward = tr.reward;
        g.rewards.clear();
    } else if (!g.rewards.empty() || tr.reward != g.first_reward) {
        if (g.rewards.empty()) g.rewards.assign(static_cast<std::size_t>(g.count), g.first_reward);
        g.rewards.push_back(tr.reward);
    }
    g.count += 1;
    g.reward_sum += tr.reward;
    total_ += 1;
}

void GroupedData::remove(const core::Transition& tr) {
    auto it = index_.find(key_of(tr));
    if (it == index_.end() || groups_[it->second].count == 0) throw std::logic_error("removing unknown transition");
    auto& g = groups_[it->second];
    if (!g.rewards.empty()) {
        auto r = std::find(g.rewards.begin(), g.rewards.end(), tr.reward);
        if (r == g.rewards.end()) throw std::logic_error("removing unknown reward");
        g.rewards.erase(r);
        if (!g.rewards.empty()) g.first_reward = g.rewards.front();
    }
    g.count -= 1;
    g.reward_sum -= tr.reward;
    if (g.count == 0) g.reward_sum = 0.0;
    total_ -= 1;
}

GroupedData GroupedData::from(const std::vector<core::Transition>& trs) {
    GroupedData d;
    for (const auto& t : trs) d.add(t);
    return d;
}

GroupedData GroupedData::from(const ReplayBuffer& buf) {
    GroupedData d;
    for (const auto& t : buf) d.add(t);
    return d;
}

std::vector<WeightedGroup> unperturbed(const GroupedData& data) {
    std::vector<WeightedGroup> out;
    const auto& gs = data.groups();
    for (std::size_t i = 0; i < gs.size(); ++i)
        if (gs[i].count > 0) out.push_back({static_cast<int>(i), double(gs[i].count), gs[i].reward_sum});
    return out;
}

std::vector<WeightedGroup> gaussian_grouped(const GroupedData& data, double v, core::Rng& rng) {
    auto out = unperturbed(data);
    for (auto& w : out) w.reward_total += std::sqrt(w.weight * v) * core::std_normal(rng);
    return out;
}

std::vector<WeightedGroup> bootstrap_grouped(const GroupedData& data, core::Rng& rng) {
    std::vector<WeightedGroup> out;
    const auto& gs = data.groups();
    long remaining = data.total();
    double mass = static_cast<double>(data.total());
    for (std::size_t i = 0; i < gs.size() && remaining > 0; ++i) {
        const auto& g = gs[i];
        if (g.count == 0) continue;
        double p = std::min(1.0, double(g.count) / mass);
        std::binomial_distribution<long> bin(remaining, p);
        long k = bin(rng);
        remaining -= k;
        mass -= double(g.count);
        if (k == 0) continue;
        double total = 0.0;
        if (g.rewards.empty()) {
            total = double(k) * g.first_reward;
        } else {
            for (long j = 0; j < k; ++j) total += g.rewards[core::uniform_index(rng, g.rewards.size())];
        }
        out.push_back({static_cast<int>(i), double(k), total});
    }
    return out;
}

bool backward_sweep_applies(const LinearValueFamily& family, const GroupedData& data, int horizon) {
    const int L = family.num_layers();
    if (L <= 0 || horizon < L) return false;
    for (const auto& g : data.groups()) {
        if (g.count == 0 || !g.next) continue;
        int layer = family.block_layer(family.features(g.s, g.action).block);
        for (int a = 0; a < family.num_actions(); ++a)
            if (family.block_layer(family.features(*g.next, a).block) != layer + 1) return false;
    }
    return true;
}

namespace {

struct BlockSystem {
    std::vector<FeatureRef> feat;             // per input
    std::vector<std::vector<int>> by_block;   // input indices
    std::vector<regress::RidgeSolver> solver; // blocks of dim > 1 with data
    std::vector<double> scalar_var;           // blocks of dim 1 with data
};

BlockSystem prepare(const LinearValueFamily& family, const GroupedData& data, const std::vector<WeightedGroup>& inputs,
                    const RlsviParams& p) {
    BlockSystem sys;
    const int B = family.num_blocks();
    sys.by_block.resize(B);
    sys.solver.resize(B);
    sys.scalar_var.assign(B, 0.0);
    sys.feat.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& g = data.groups()[inputs[i].group];
        sys.feat.push_back(family.features(g.s, g.action));
        sys.by_block[sys.feat.back().block].push_back(static_cast<int>(i));
    }
    for (int b = 0; b < B; ++b) {
        if (sys.by_block[b].empty()) continue;
        const int d = family.block_dim(b);
        if (d == 1) {
            double prec = 1.0 / p.prior_var;
            for (int i : sys.by_block[b]) prec += inputs[i].weight * sys.feat[i].data[0] * sys.feat[i].data[0] / p.noise_var;
            sys.scalar_var[b] = 1.0 / prec;
        } else {
            Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d) / p.prior_var;
            for (int i : sys.by_block[b]) {
                Eigen::Map<const Eigen::VectorXd> f(sys.feat[i].data, d);
                A.noalias() += (inputs[i].weight / p.noise_var) * f * f.transpose();
            }
            sys.solver[b] = regress::RidgeSolver(A);
        }
    }
    return sys;
}

// Solve block b given the parameter vector used for next-state values.
void solve_block(int b, const LinearValueFamily& family, const GroupedData& data,
                 const std::vector<WeightedGroup>& inputs, const RlsviParams& p, const Eigen::VectorXd& center,
                 const BlockSystem& sys, const Eigen::VectorXd& theta_prev, Eigen::VectorXd& theta_out) {
    const int off = family.block_offset(b), d = family.block_dim(b);
    if (sys.by_block[b].empty()) {
        theta_out.segment(off, d) = center.segment(off, d);
        return;
    }
    Eigen::VectorXd rhs = center.segment(off, d) / p.prior_var;
    for (int i : sys.by_block[b]) {
        const auto& in = inputs[i];
        const auto& g = data.groups()[in.group];
        double target = in.reward_total;
        if (g.next) target += in.weight * family.max_q(theta_prev, *g.next);
        const double* f = sys.feat[i].data;
        for (int k = 0; k < d; ++k) rhs[k] += f[k] * target / p.noise_var;
    }
    if (d == 1)
        theta_out[off] = sys.scalar_var[b] * rhs[0];
    else
        theta_out.segment(off, d) = sys.solver[b].solve(rhs);
}

}  // namespace

Eigen::VectorXd solve_value_iteration(const LinearValueFamily& family, const GroupedData& data,
                                      const std::vector<WeightedGroup>& inputs, const RlsviParams& params,
                                      const Eigen::VectorXd& center, SolveRoute route, LearnInstrument* instrument) {
    const int D = family.dim();
    params.validate(D);
    if (center.size() != D) throw std::invalid_argument("regularization center has wrong length");
    if (route == SolveRoute::automatic)
        route = backward_sweep_applies(family, data, params.horizon) ? SolveRoute::backward_sweep : SolveRoute::iterate;
    else if (route == SolveRoute::backward_sweep && !backward_sweep_applies(family, data, params.horizon))
        throw std::invalid_argument("backward sweep does not apply to this data");
    if (instrument) instrument->route_used = route;

    auto sys = prepare(family, data, inputs, params);
    const int B = family.num_blocks();

    if (route == SolveRoute::iterate) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(D), next(D);
        for (int h = 0; h < params.horizon; ++h) {
            if (instrument) {
                std::vector<double> used;
                used.reserve(inputs.size());
                for (const auto& in : inputs) used.push_back(in.reward_total);
                instrument->rewards_per_pass.push_back(std::move(used));
            }
            for (int b = 0; b < B; ++b) solve_block(b, family, data, inputs, params, center, sys, theta, next);
            theta.swap(next);
        }
        return theta;
    }

    // Layers are final once the layer after them is; each target reads only
    // the next layer, so solving in place from the last layer is exact.
    const int L = family.num_layers();
    std::vector<std::vector<int>> blocks_in(L);
    for (int b = 0; b < B; ++b) blocks_in[family.block_layer(b)].push_back(b);
    Eigen::VectorXd theta = center;
    for (int l = L - 1; l >= 0; --l)
        for (int b : blocks_in[l]) solve_block(b, family, data, inputs, params, center, sys, theta, theta);
    if (instrument) {
        std::vector<double> used;
        for (const auto& in : inputs) used.push_back(in.reward_total);
        instrument->rewards_per_pass.push_back(std::move(used));
    }
    return theta;
}

Eigen::VectorXd lsvi_learn(const ReplayBuffer& buffer, const LinearValueFamily& family, const RlsviParams& params) {
    auto data = GroupedData::from(buffer);
    return solve_value_iteration(family, data, unperturbed(data), params, params.prior_mean_or_zero(family.dim()),
                                 SolveRoute::iterate);
}

std::vector<core::Transition> gaussian_perturb(const ReplayBuffer& buffer, double v, core::Rng& rng) {
    if (!(v > 0.0)) throw std::invalid_argument("noise variance must be positive");
    std::vector<core::Transition> out(buffer.begin(), buffer.end());
    const double sd = std::sqrt(v);
    for (auto& t : out) t.reward += sd * core::std_normal(rng);
    return out;
}

std::vector<core::Transition> bootstrap_perturb(const ReplayBuffer& buffer, core::Rng& rng) {
    std::vector<core::Transition> out;
    out.reserve(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) out.push_back(buffer[core::uniform_index(rng, buffer.size())]);
    return out;
}

Eigen::VectorXd sample_prior(const RlsviParams& params, int dim, core::Rng& rng) {
    Eigen::VectorXd th = params.prior_mean_or_zero(dim);
    const double sd = std::sqrt(params.prior_var);
    for (int i = 0; i < dim; ++i) th[i] += sd * core::std_normal(rng);
    return th;
}

Eigen::VectorXd rlsvi_learn(const ReplayBuffer& buffer, const LinearValueFamily& family, const RlsviParams& params,
                            PerturbMode mode, core::Rng& rng, const RlsviOverride* fix, LearnInstrument* instrument) {
    const int D = family.dim();
    params.validate(D);
    Eigen::VectorXd center = (fix && fix->prior_draw) ? *fix->prior_draw : sample_prior(params, D, rng);
    std::vector<core::Transition> perturbed;
    if (fix && fix->zero_noise)
        perturbed.assign(buffer.begin(), buffer.end());
    else if (mode == PerturbMode::gaussian)
        perturbed = gaussian_perturb(buffer, params.noise_var, rng);
    else
        perturbed = bootstrap_perturb(buffer, rng);
    auto data = GroupedData::from(perturbed);
    return solve_value_iteration(family, data, unperturbed(data), params, center, SolveRoute::iterate, instrument);
}

}  // namespace rve::agents
