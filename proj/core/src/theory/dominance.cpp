#include "rve/theory/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rve/envs/tabular_mdp.hpp"

namespace rve::theory {

void SampleSet::validate() const {
    if (draws.empty()) throw std::invalid_argument("sample set '" + label + "' is empty");
    for (double d : draws)
        if (!std::isfinite(d)) throw std::invalid_argument("sample set '" + label + "' has a non-finite draw");
}

StopLoss::StopLoss(const SampleSet& s) : sorted_(s.draws) {
    s.validate();
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    suffix_sum_.assign(n + 1, 0.0);
    suffix_sum_sq_.assign(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        suffix_sum_[i] = suffix_sum_[i + 1] + sorted_[i];
        suffix_sum_sq_[i] = suffix_sum_sq_[i + 1] + sorted_[i] * sorted_[i];
    }
}

double StopLoss::mean_excess(double t) const {
    const auto i = std::size_t(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
    const double count = double(sorted_.size() - i);
    return std::max(0.0, (suffix_sum_[i] - t * count) / double(sorted_.size()));
}

double StopLoss::std_error(double t) const {
    const auto i = std::size_t(std::upper_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
    const double n = double(sorted_.size());
    if (n < 2) return 0.0;
    const double count = double(sorted_.size() - i);
    const double m1 = (suffix_sum_[i] - t * count) / n;
    const double m2 = (suffix_sum_sq_[i] - 2 * t * suffix_sum_[i] + t * t * count) / n;
    const double var = std::max(0.0, m2 - m1 * m1) * n / (n - 1);
    return std::sqrt(var / n);
}

nlohmann::json DominanceVerdict::to_json() const {
    return {{"dominates", dominates},
            {"worst_threshold", worst_threshold},
            {"worst_margin", worst_margin},
            {"grid_points", grid_points}};
}

std::vector<double> even_grid(double lo, double hi, int points) {
    if (points < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> g(std::size_t(points), lo);
    if (points == 1) return g;
    for (int i = 0; i < points; ++i) g[std::size_t(i)] = lo + (hi - lo) * double(i) / double(points - 1);
    return g;
}

DominanceVerdict increasing_convex_dominates(const SampleSet& x, const SampleSet& y, const DominanceOptions& opts) {
    StopLoss sx(x), sy(y);
    if (opts.se_multiplier < 0.0 || opts.extra_slack < 0.0) throw std::invalid_argument("slack must be non-negative");
    const auto grid = opts.grid.empty()
                          ? even_grid(std::min(sx.min(), sy.min()), std::max(sx.max(), sy.max()), opts.grid_points)
                          : opts.grid;
    DominanceVerdict v;
    v.grid_points = int(grid.size());
    v.worst_margin = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        const double se = std::hypot(sx.std_error(t), sy.std_error(t));
        const double margin = sx.mean_excess(t) - sy.mean_excess(t) + opts.se_multiplier * se + opts.extra_slack;
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            v.worst_threshold = t;
        }
    }
    v.dominates = v.worst_margin >= 0.0;
    return v;
}

nlohmann::json GaussianDirichletReport::to_json() const {
    return {{"mu", mu},
            {"sigma2", sigma2},
            {"dirichlet_mean", dirichlet_mean},
            {"variance_threshold", variance_threshold},
            {"conditions_hold", conditions_hold},
            {"verdict", verdict.to_json()}};
}

GaussianDirichletReport gaussian_dirichlet_check(std::span<const double> v, std::span<const double> alpha, double mu,
                                                 double sigma2, int num_draws, core::Rng& rng,
                                                 const DominanceOptions& opts) {
    if (v.size() != alpha.size() || v.empty()) throw std::invalid_argument("V and alpha must have the same positive length");
    const double beta = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    if (beta < 2.0) throw std::invalid_argument("Dirichlet pseudocount must be at least 2");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("Gaussian variance must be positive");
    if (num_draws < 2) throw std::invalid_argument("need at least two draws");

    GaussianDirichletReport r;
    r.mu = mu;
    r.sigma2 = sigma2;
    for (std::size_t i = 0; i < v.size(); ++i) r.dirichlet_mean += alpha[i] * v[i] / beta;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    r.variance_threshold = (*hi - *lo) * (*hi - *lo) / beta;
    r.conditions_hold = mu >= r.dirichlet_mean && sigma2 >= r.variance_threshold;

    SampleSet xs{{}, "gaussian"}, ys{{}, "dirichlet"};
    xs.draws.resize(std::size_t(num_draws));
    ys.draws.resize(std::size_t(num_draws));
    const double sd = std::sqrt(sigma2);
    for (auto& d : xs.draws) d = mu + sd * core::std_normal(rng);
    for (auto& d : ys.draws) {
        auto p = envs::sample_dirichlet(alpha, rng);
        d = std::inner_product(p.begin(), p.end(), v.begin(), 0.0);
    }
    r.verdict = increasing_convex_dominates(xs, ys, opts);
    return r;
}

}  // namespace rve::theory
