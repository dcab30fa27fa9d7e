#include "rve/baselines/informed_psrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rve/core/action.hpp"

namespace rve::baselines {

InformedDeepSeaPsrl::InformedDeepSeaPsrl(int size_n, double reward_noise_sd)
    : n_(size_n), noise_sd_(reward_noise_sd), right_(std::size_t(size_n) * size_n, -1), q_(size_n, size_n, 2) {
    if (size_n < 2) throw std::invalid_argument("deep-sea size must be at least 2");
    if (reward_noise_sd < 0.0) throw std::invalid_argument("noise sd must be non-negative");
}

void InformedDeepSeaPsrl::update_buffer(const core::Transition& tr) {
    const int r = tr.old_state.t, c = tr.old_state.x, a = tr.action;
    if (r < 0 || r >= n_ || c < 0 || c >= n_ || a < 0 || a > 1) throw std::out_of_range("not a deep-sea transition");
    if (tr.new_state) {
        // the next column identifies the move except at the edges, where the
        // saturated move still differs from the other one
        const int next = tr.new_state->x;
        const int went_right = next == std::min(c + 1, n_ - 1) && next != std::max(c - 1, 0) ? 1 : 0;
        right_[std::size_t(r) * n_ + c] = went_right ? a : 1 - a;
        return;
    }
    if (r != n_ - 1 || c != n_ - 1) return;
    const double cost = 0.01 / n_;
    for (int right = 0; right < 2; ++right)
        for (int treasure = 0; treasure < 2; ++treasure) {
            const double mean = a == right ? (treasure ? 1.0 : -1.0) - cost : 0.0;
            const double err = tr.reward - mean;
            double& ll = chest_loglik_[2 * right + treasure];
            if (noise_sd_ > 0.0)
                ll -= err * err / (2.0 * noise_sd_ * noise_sd_);
            else if (std::abs(err) > 1e-9)
                ll = -std::numeric_limits<double>::infinity();
        }
}

std::array<double, 4> InformedDeepSeaPsrl::chest_posterior() const {
    const double top = *std::max_element(chest_loglik_.begin(), chest_loglik_.end());
    if (!std::isfinite(top)) throw std::logic_error("chest observations are inconsistent with every hypothesis");
    std::array<double, 4> p{};
    double z = 0.0;
    for (int i = 0; i < 4; ++i) z += p[i] = std::exp(chest_loglik_[i] - top);
    for (double& x : p) x /= z;
    return p;
}

envs::FiniteMdp InformedDeepSeaPsrl::sample_mdp(core::Rng& rng) const {
    const auto post = chest_posterior();
    double u = core::uniform01(rng);
    int h = 0;
    while (h < 3 && u >= post[h]) u -= post[h++];
    const int chest_right = h / 2;
    const double chest_value = h % 2 ? 1.0 : -1.0;
    const double cost = 0.01 / n_;

    envs::FiniteMdp m(n_, n_, 2);
    std::fill(m.initial.begin(), m.initial.end(), 0.0);
    m.initial[0] = 1.0;
    for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) {
            int right = right_[std::size_t(r) * n_ + c];
            if (r == n_ - 1 && c == n_ - 1) right = chest_right;
            if (right < 0) right = int(core::uniform_index(rng, 2));
            for (int a = 0; a < 2; ++a) {
                const bool is_right = a == right;
                double rew = is_right && r == c ? -cost : 0.0;
                if (is_right && r == n_ - 1 && c == n_ - 1) rew += chest_value;
                m.r(r, c, a) = rew;
                double* p = m.p(r, c, a);
                std::fill(p, p + n_, 0.0);
                p[is_right ? std::min(c + 1, n_ - 1) : std::max(c - 1, 0)] = 1.0;
            }
        }
    return m;
}

void InformedDeepSeaPsrl::learn_from_buffer(core::Rng& rng) { q_ = envs::value_iteration(sample_mdp(rng)); }

int InformedDeepSeaPsrl::act(const core::State& s, core::Rng& rng) { return core::greedy_action(q_.row(s.t, s.x), rng); }

bool InformedDeepSeaPsrl::action_distribution(const core::State& s, std::span<double> out) const {
    core::greedy_distribution(q_.row(s.t, s.x), out);
    return true;
}

}  // namespace rve::baselines
