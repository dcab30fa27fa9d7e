#include "rve/envs/deep_sea.hpp"

#include <algorithm>
#include <stdexcept>

namespace rve::envs {

ObservationMode parse_observation_mode(const std::string& s) {
    if (s == "tabular") return ObservationMode::tabular;
    if (s == "pixel") return ObservationMode::pixel;
    if (s == "linear") return ObservationMode::linear;
    if (s == "always_right_pixel") return ObservationMode::always_right_pixel;
    throw std::invalid_argument("unknown observation mode '" + s + "'");
}

std::string to_string(ObservationMode m) {
    switch (m) {
        case ObservationMode::tabular: return "tabular";
        case ObservationMode::pixel: return "pixel";
        case ObservationMode::linear: return "linear";
        case ObservationMode::always_right_pixel: return "always_right_pixel";
    }
    return "?";
}

DeepSeaLayout::DeepSeaLayout(const DeepSeaConfig& cfg) : cfg_(cfg) {
    if (cfg.size_n < 1) throw std::invalid_argument("deep sea size must be positive");
    if (cfg.reward_noise_sd < 0.0) throw std::invalid_argument("reward noise sd must be non-negative");
    const int n = cfg.size_n;
    right_.assign(std::size_t(n) * n, 1);
    if (cfg.observation_mode != ObservationMode::always_right_pixel) {
        core::Rng rng = core::child_stream(cfg.assoc_seed, "deep_sea_assoc");
        for (auto& r : right_) r = static_cast<std::uint8_t>(rng() >> 63);
    }
}

DeepSeaStep deep_sea_step(const DeepSeaLayout& layout, Cell c, int action_index) {
    const auto& cfg = layout.config();
    const int n = cfg.size_n;
    if (c.row < 0 || c.row >= n || c.col < 0 || c.col >= n) throw std::out_of_range("deep sea cell out of range");
    if (action_index != 0 && action_index != 1) throw std::out_of_range("deep sea action must be 0 or 1");
    bool right = action_index == layout.right_action(c);
    DeepSeaStep out;
    if (right) {
        if (c.row == c.col) out.reward -= cfg.move_cost();
        if (c.row == n - 1 && c.col == n - 1) out.reward += cfg.has_treasure ? 1.0 : -1.0;
    }
    if (c.row + 1 < n) out.next = Cell{c.row + 1, right ? std::min(c.col + 1, n - 1) : std::max(c.col - 1, 0)};
    return out;
}

Observation deep_sea_observe(const DeepSeaConfig& cfg, Cell c) {
    const int n = cfg.size_n;
    if (c.row < 0 || c.row >= n || c.col < 0 || c.col >= n) throw std::out_of_range("deep sea cell out of range");
    Observation o;
    o.index = c.row * n + c.col;
    if (cfg.observation_mode == ObservationMode::pixel || cfg.observation_mode == ObservationMode::always_right_pixel) {
        o.grid.assign(std::size_t(n) * n, 0.0);
        o.grid[o.index] = 1.0;
    }
    return o;
}

FiniteMdp deep_sea_model(const DeepSeaLayout& layout) {
    const int n = layout.config().size_n;
    FiniteMdp m(n, n, 2);
    m.initial[0] = 1.0;
    for (int t = 0; t < n; ++t)
        for (int x = 0; x < n; ++x)
            for (int a = 0; a < 2; ++a) {
                auto s = deep_sea_step(layout, Cell{t, x}, a);
                m.r(t, x, a) = s.reward;
                if (s.next) m.p(t, x, a)[s.next->col] = 1.0;
            }
    return m;
}

DeepSea::DeepSea(const DeepSeaConfig& cfg) : layout_(cfg), model_(deep_sea_model(layout_)) {}

core::State DeepSea::reset(core::Rng&) {
    cell_ = Cell{0, 0};
    done_ = false;
    return core::State{0, 0, {}};
}

core::StepResult DeepSea::step(int action, core::Rng& rng) {
    if (done_) throw std::logic_error("step called on a finished episode");
    auto s = deep_sea_step(layout_, cell_, action);
    core::StepResult r;
    r.reward = s.reward;
    if (config().reward_noise_sd > 0.0) r.reward += config().reward_noise_sd * core::std_normal(rng);
    if (s.next) {
        cell_ = *s.next;
        r.next = core::State{cell_.row, cell_.col, {}};
    } else {
        done_ = true;
    }
    return r;
}

}  // namespace rve::envs
