#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rve/core/rng.hpp"

namespace rve::theory {

struct SampleSet {
    std::vector<double> draws;
    std::string label;

    void validate() const;  // non-empty, finite
};

// Stop-loss transform t -> E[(X - t)_+] of the empirical distribution, with
// the standard error of the mean at each t. Draws are sorted once; each
// evaluation is a binary search plus prefix sums.
class StopLoss {
public:
    explicit StopLoss(const SampleSet& s);
    double mean_excess(double t) const;
    double std_error(double t) const;
    double min() const { return sorted_.front(); }
    double max() const { return sorted_.back(); }

private:
    std::vector<double> sorted_;
    std::vector<double> suffix_sum_;     // sum of sorted_[i..]
    std::vector<double> suffix_sum_sq_;  // sum of sorted_[i..]^2
};

struct DominanceOptions {
    int grid_points = 200;
    double se_multiplier = 3.0;  // slack per point, in pooled standard errors
    double extra_slack = 0.0;
    std::vector<double> grid;    // explicit thresholds; empty means an even grid over the pooled range
};

struct DominanceVerdict {
    bool dominates = true;
    double worst_threshold = 0.0;
    double worst_margin = 0.0;  // min over t of (X curve - Y curve + slack)
    int grid_points = 0;

    nlohmann::json to_json() const;
};

std::vector<double> even_grid(double lo, double hi, int points);

// X dominates Y in increasing convex order iff E[(X-t)_+] >= E[(Y-t)_+] for every t.
DominanceVerdict increasing_convex_dominates(const SampleSet& x, const SampleSet& y,
                                             const DominanceOptions& opts = {});

struct GaussianDirichletReport {
    double mu = 0.0;
    double sigma2 = 0.0;
    double dirichlet_mean = 0.0;       // alpha'V / sum(alpha)
    double variance_threshold = 0.0;   // span(V)^2 / sum(alpha)
    bool conditions_hold = false;
    DominanceVerdict verdict;

    nlohmann::json to_json() const;
};

// Compares X ~ N(mu, sigma2) against Y = P'V with P ~ Dirichlet(alpha).
// The Gaussian draws are mu + sigma * Z with Z taken from rng first, so equal
// seeds give shifted copies of the same draws for different mu.
GaussianDirichletReport gaussian_dirichlet_check(std::span<const double> v, std::span<const double> alpha, double mu,
                                                 double sigma2, int num_draws, core::Rng& rng,
                                                 const DominanceOptions& opts = {});

}  // namespace rve::theory
