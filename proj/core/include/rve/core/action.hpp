#pragma once

#include <span>

#include "rve/core/rng.hpp"

namespace rve::core {

int greedy_action(std::span<const double> q, Rng& rng);
int epsilon_greedy_action(std::span<const double> q, double epsilon, Rng& rng);
int boltzmann_action(std::span<const double> q, double eta, Rng& rng);

// Exact action probabilities of the three rules (ties in the greedy rule
// share mass equally).
void greedy_distribution(std::span<const double> q, std::span<double> out);
void epsilon_greedy_distribution(std::span<const double> q, double epsilon, std::span<double> out);
void boltzmann_distribution(std::span<const double> q, double eta, std::span<double> out);

}  // namespace rve::core
