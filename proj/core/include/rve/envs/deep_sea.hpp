#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rve/core/interfaces.hpp"
#include "rve/envs/planning.hpp"

namespace rve::envs {

enum class ObservationMode { tabular, pixel, linear, always_right_pixel };

ObservationMode parse_observation_mode(const std::string& s);
std::string to_string(ObservationMode m);

struct DeepSeaConfig {
    int size_n = 10;
    bool has_treasure = true;
    std::uint64_t assoc_seed = 0;
    double reward_noise_sd = 0.0;
    ObservationMode observation_mode = ObservationMode::tabular;

    double move_cost() const { return 0.01 / size_n; }
};

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
};

// Which action index means "right" at each cell, derived from assoc_seed.
class DeepSeaLayout {
public:
    explicit DeepSeaLayout(const DeepSeaConfig& cfg);
    const DeepSeaConfig& config() const { return cfg_; }
    int right_action(Cell c) const { return right_[std::size_t(c.row) * cfg_.size_n + c.col]; }

private:
    DeepSeaConfig cfg_;
    std::vector<std::uint8_t> right_;
};

struct DeepSeaStep {
    double reward = 0.0;  // mean reward; observation noise is added by the environment
    std::optional<Cell> next;
};

DeepSeaStep deep_sea_step(const DeepSeaLayout& layout, Cell cell, int action_index);

// tabular: index only; pixel / always_right_pixel: index plus the N*N grid;
// linear: index only (features come from a FeatureMap keyed on the state).
struct Observation {
    int index = 0;
    std::vector<double> grid;
};

Observation deep_sea_observe(const DeepSeaConfig& cfg, Cell cell);

FiniteMdp deep_sea_model(const DeepSeaLayout& layout);

class DeepSea : public core::Environment {
public:
    explicit DeepSea(const DeepSeaConfig& cfg);

    core::State reset(core::Rng& rng) override;
    core::StepResult step(int action, core::Rng& rng) override;
    int num_actions() const override { return 2; }
    const FiniteMdp* planning_model() const override { return &model_; }

    const DeepSeaLayout& layout() const { return layout_; }
    const DeepSeaConfig& config() const { return layout_.config(); }
    Cell cell() const { return cell_; }

private:
    DeepSeaLayout layout_;
    FiniteMdp model_;
    Cell cell_;
    bool done_ = true;
};

}  // namespace rve::envs
