#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rve/core/rng.hpp"

namespace rve::regress {

struct RidgeProblem {
    Eigen::MatrixXd design;  // n x D, one row per observation
    Eigen::VectorXd targets;
    double noise_var = 1.0;
    double prior_var = 1.0;
    Eigen::VectorXd prior_mean;

    int dim() const { return static_cast<int>(prior_mean.size()); }
    void validate() const;
};

// Cholesky factor of a symmetric positive-definite precision matrix.
class RidgeSolver {
public:
    RidgeSolver() = default;
    explicit RidgeSolver(const Eigen::MatrixXd& precision);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
    Eigen::MatrixXd covariance() const;  // densified inverse of the precision
    const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }
    bool jittered() const { return jittered_; }
    int dim() const { return static_cast<int>(llt_.rows()); }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool jittered_ = false;
};

// X^T X / v + I / lambda
Eigen::MatrixXd ridge_precision(const RidgeProblem& p);

struct RidgePosterior {
    Eigen::VectorXd mean;
    RidgeSolver solver;
    Eigen::MatrixXd covariance() const { return solver.covariance(); }
};

RidgePosterior ridge_posterior(const RidgeProblem& p);

// Test hook: fixes the data noise z and/or the prior draw theta_hat.
struct PerturbationOverride {
    std::optional<Eigen::VectorXd> noise;
    std::optional<Eigen::VectorXd> prior_draw;
};

Eigen::VectorXd perturbed_ridge_sample(const RidgeProblem& p, core::Rng& rng,
                                       const PerturbationOverride* fix = nullptr);

// Independent ridge solves, one per block; an empty block returns its prior mean.
std::vector<Eigen::VectorXd> block_solve(const std::vector<RidgeProblem>& blocks);

}  // namespace rve::regress
