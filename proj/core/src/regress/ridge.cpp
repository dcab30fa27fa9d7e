#include "rve/regress/ridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rve/core/log.hpp"

namespace rve::regress {

void RidgeProblem::validate() const {
    const auto D = prior_mean.size();
    if (D == 0) throw std::invalid_argument("ridge problem has zero dimension");
    if (design.rows() != targets.size()) throw std::invalid_argument("design rows and targets differ in length");
    if (design.rows() > 0 && design.cols() != D) throw std::invalid_argument("design width does not match prior mean");
    if (!(noise_var > 0.0) || !(prior_var > 0.0)) throw std::invalid_argument("variances must be positive");
    if (!design.allFinite() || !targets.allFinite() || !prior_mean.allFinite() || !std::isfinite(noise_var) ||
        !std::isfinite(prior_var))
        throw std::invalid_argument("non-finite ridge input");
}

RidgeSolver::RidgeSolver(const Eigen::MatrixXd& precision) {
    llt_.compute(precision);
    if (llt_.info() == Eigen::Success) return;
    const auto D = precision.rows();
    double jitter = 1e-10 * precision.trace() / static_cast<double>(D);
    core::log_warning("precision matrix not positive definite; adding diagonal jitter " + std::to_string(jitter));
    Eigen::MatrixXd p = precision;
    p.diagonal().array() += jitter;
    llt_.compute(p);
    jittered_ = true;
    if (llt_.info() != Eigen::Success) throw std::runtime_error("precision matrix not positive definite after jitter");
}

Eigen::MatrixXd RidgeSolver::covariance() const {
    return llt_.solve(Eigen::MatrixXd::Identity(llt_.rows(), llt_.rows()));
}

Eigen::MatrixXd ridge_precision(const RidgeProblem& p) {
    const auto D = p.dim();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(D, D) / p.prior_var;
    if (p.design.rows() > 0) A.selfadjointView<Eigen::Lower>().rankUpdate(p.design.transpose(), 1.0 / p.noise_var);
    A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
    return A;
}

namespace {

Eigen::VectorXd rhs_of(const RidgeProblem& p, const Eigen::VectorXd& y, const Eigen::VectorXd& center) {
    Eigen::VectorXd b = center / p.prior_var;
    if (p.design.rows() > 0) b.noalias() += p.design.transpose() * y / p.noise_var;
    return b;
}

}  // namespace

RidgePosterior ridge_posterior(const RidgeProblem& p) {
    p.validate();
    RidgePosterior post{Eigen::VectorXd(), RidgeSolver(ridge_precision(p))};
    post.mean = post.solver.solve(rhs_of(p, p.targets, p.prior_mean));
    return post;
}

Eigen::VectorXd perturbed_ridge_sample(const RidgeProblem& p, core::Rng& rng, const PerturbationOverride* fix) {
    p.validate();
    const auto D = p.dim();
    const auto n = p.targets.size();
    Eigen::VectorXd theta_hat(D);
    if (fix && fix->prior_draw) {
        theta_hat = *fix->prior_draw;
    } else {
        const double sl = std::sqrt(p.prior_var);
        for (Eigen::Index i = 0; i < D; ++i) theta_hat[i] = p.prior_mean[i] + sl * core::std_normal(rng);
    }
    Eigen::VectorXd y = p.targets;
    if (fix && fix->noise) {
        y += *fix->noise;
    } else {
        const double sv = std::sqrt(p.noise_var);
        for (Eigen::Index i = 0; i < n; ++i) y[i] += sv * core::std_normal(rng);
    }
    RidgeSolver solver(ridge_precision(p));
    return solver.solve(rhs_of(p, y, theta_hat));
}

std::vector<Eigen::VectorXd> block_solve(const std::vector<RidgeProblem>& blocks) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.design.rows() == 0) {
            b.validate();
            out.push_back(b.prior_mean);
        } else {
            out.push_back(ridge_posterior(b).mean);
        }
    }
    return out;
}

}  // namespace rve::regress
