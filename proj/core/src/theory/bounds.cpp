#include "rve/theory/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace rve::theory {

nlohmann::json VisitSumReport::to_json() const {
    return {{"lhs1", lhs1}, {"rhs1", rhs1}, {"lhs2", lhs2}, {"rhs2", rhs2}, {"holds", {holds1, holds2}}};
}

VisitSumReport visit_sum_bounds(const VisitStream& stream, double beta, int horizon, int num_states, int num_actions) {
    if (beta < 2.0) throw std::invalid_argument("beta must be at least 2");
    if (horizon < 1 || num_states < 1 || num_actions < 1) throw std::invalid_argument("shape must be positive");
    const std::size_t cells = std::size_t(horizon) * num_states * num_actions;
    std::vector<double> n(cells, 0.0);
    std::vector<std::size_t> touched;
    VisitSumReport r;
    for (const auto& episode : stream) {
        touched.clear();
        for (const auto& v : episode) {
            if (v.t < 0 || v.t >= horizon || v.x < 0 || v.x >= num_states || v.a < 0 || v.a >= num_actions)
                throw std::out_of_range("visit outside the (H, X, A) shape");
            const std::size_t i = (std::size_t(v.t) * num_states + v.x) * num_actions + v.a;
            r.lhs1 += 1.0 / (beta + n[i]);
            r.lhs2 += 1.0 / std::sqrt(beta + n[i]);
            touched.push_back(i);
        }
        for (auto i : touched) n[i] += 1.0;
    }
    const double L = double(stream.size());
    const double xa = double(num_states) * num_actions;
    r.rhs1 = horizon * xa * std::log(1.0 + L / xa);
    r.rhs2 = 2.0 * std::sqrt(double(horizon) * horizon * xa * L);
    r.holds1 = r.lhs1 <= r.rhs1;
    r.holds2 = r.lhs2 <= r.rhs2;
    return r;
}

VisitStream random_visit_stream(int episodes, int horizon, int num_states, int num_actions, core::Rng& rng) {
    VisitStream s(static_cast<std::size_t>(episodes));
    for (auto& e : s)
        for (int t = 0; t < horizon; ++t)
            e.push_back({t, int(core::uniform_index(rng, std::uint64_t(num_states))),
                         int(core::uniform_index(rng, std::uint64_t(num_actions)))});
    return s;
}

nlohmann::json GaussianMaxReport::to_json() const {
    return {{"n", n},
            {"max_mean", max_mean},
            {"max_se", max_se},
            {"max_bound", max_bound},
            {"weighted_mean", weighted_mean},
            {"weighted_se", weighted_se},
            {"weighted_bound", weighted_bound},
            {"holds", holds}};
}

GaussianMaxReport gaussian_max_bound_check(const std::vector<double>& sigmas, int num_draws, core::Rng& rng) {
    if (sigmas.empty()) throw std::invalid_argument("need at least one variable");
    if (num_draws < 2) throw std::invalid_argument("need at least two draws");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("sigmas must be positive");
    const int n = int(sigmas.size());
    double s_max = 0, ss_max = 0, s_w = 0, ss_w = 0, s_sig2 = 0;
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int d = 0; d < num_draws; ++d) {
        for (auto& v : z) v = core::std_normal(rng);
        double best = z[0];
        int j = 0;
        double best_w = sigmas[0] * z[0];
        for (int i = 1; i < n; ++i) {
            best = std::max(best, z[std::size_t(i)]);
            const double w = sigmas[std::size_t(i)] * z[std::size_t(i)];
            if (w > best_w) {
                best_w = w;
                j = i;
            }
        }
        s_max += best;
        ss_max += best * best;
        s_w += best_w;
        ss_w += best_w * best_w;
        s_sig2 += sigmas[std::size_t(j)] * sigmas[std::size_t(j)];
    }
    const double m = double(num_draws);
    auto se = [m](double s, double ss) { return std::sqrt(std::max(0.0, ss / m - (s / m) * (s / m)) / (m - 1)); };
    GaussianMaxReport r;
    r.n = n;
    r.max_mean = s_max / m;
    r.max_se = se(s_max, ss_max);
    r.max_bound = std::sqrt(2.0 * std::log(double(n)));
    r.weighted_mean = s_w / m;
    r.weighted_se = se(s_w, ss_w);
    r.weighted_bound = std::sqrt(2.0 * std::log(double(n)) * s_sig2 / m);
    r.holds = r.max_mean <= r.max_bound + 3 * r.max_se && r.weighted_mean <= r.weighted_bound + 3 * r.weighted_se;
    return r;
}

}  // namespace rve::theory
