#include "rve/theory/suite.hpp"

#include <algorithm>
#include <cmath>

#include "rve/envs/tabular_mdp.hpp"
#include "rve/theory/bellman_gap.hpp"
#include "rve/theory/bounds.hpp"
#include "rve/theory/dominance.hpp"

namespace rve::theory {

envs::FiniteMdp random_finite_mdp(int horizon, int num_states, int num_actions, core::Rng& rng) {
    envs::FiniteMdp m(horizon, num_states, num_actions);
    const std::vector<double> ones(std::size_t(num_states), 1.0);
    for (int t = 0; t < horizon; ++t)
        for (int x = 0; x < num_states; ++x)
            for (int a = 0; a < num_actions; ++a) {
                m.r(t, x, a) = core::uniform01(rng);
                auto p = envs::sample_dirichlet(ones, rng);
                std::copy(p.begin(), p.end(), m.p(t, x, a));
            }
    std::fill(m.initial.begin(), m.initial.end(), 1.0 / num_states);
    return m;
}

namespace {

int draw_between(core::Rng& rng, int lo, int hi) { return lo + int(core::uniform_index(rng, std::uint64_t(hi - lo + 1))); }

nlohmann::json check_planning_gap(core::Rng& rng, int cases, bool& pass) {
    double worst = 0.0;
    for (int c = 0; c < cases; ++c) {
        const int H = draw_between(rng, 1, 4), X = draw_between(rng, 1, 4), A = draw_between(rng, 1, 3);
        auto mdp = random_finite_mdp(H, X, A, rng);
        envs::QTable q(H + 1, X, A);
        for (int t = 0; t < H; ++t)
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) q.at(t, x, a) = 3.0 * core::std_normal(rng);
        worst = std::max(worst, planning_bellman_gap(mdp, q).gap);
    }
    pass = worst < 1e-9;
    return {{"cases", cases}, {"max_gap", worst}, {"tolerance", 1e-9}, {"pass", pass}};
}

nlohmann::json check_gaussian_order(core::Rng& rng, int draws, bool& pass) {
    // Gaussians are ordered iff mu_x >= mu_y and sigma_x >= sigma_y
    const double mus[] = {0.0, 1.0};
    const double sds[] = {1.0, 2.0};
    struct Case {
        double mx, sx, my, sy;
    };
    std::vector<Case> cases;
    for (double mx : mus)
        for (double sx : sds)
            for (double my : mus)
                for (double sy : sds) cases.push_back({mx, sx, my, sy});
    cases.push_back({0.5, 1.5, 0.0, 1.0});
    cases.push_back({0.0, 1.0, 0.5, 1.5});
    cases.push_back({2.0, 0.5, 0.0, 1.5});
    cases.push_back({-1.0, 3.0, 0.0, 1.0});
    pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cases) {
        SampleSet x{{}, "x"}, y{{}, "y"};
        for (int i = 0; i < draws; ++i) x.draws.push_back(c.mx + c.sx * core::std_normal(rng));
        for (int i = 0; i < draws; ++i) y.draws.push_back(c.my + c.sy * core::std_normal(rng));
        const bool expected = c.mx >= c.my && c.sx >= c.sy;
        auto v = increasing_convex_dominates(x, y);
        const bool ok = v.dominates == expected;
        pass = pass && ok;
        rows.push_back({{"mu_x", c.mx},
                        {"sigma_x", c.sx},
                        {"mu_y", c.my},
                        {"sigma_y", c.sy},
                        {"expected", expected},
                        {"verdict", v.to_json()},
                        {"match", ok}});
    }
    return {{"cases", rows}, {"pass", pass}};
}

nlohmann::json check_gaussian_dirichlet(core::Rng& rng, int cases, int draws, bool& pass) {
    pass = true;
    int dominated = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cases; ++c) {
        const int n = draw_between(rng, 2, 5);
        std::vector<double> v(static_cast<std::size_t>(n)), alpha(static_cast<std::size_t>(n));
        for (auto& e : v) e = 2.0 * core::uniform01(rng) - 1.0;
        // n >= 2 entries of at least 1 keep the pseudocount at 2 or more
        for (auto& e : alpha) e = 1.0 + 2.0 * core::uniform01(rng);
        double beta = 0;
        for (double a : alpha) beta += a;
        double mean = 0;
        for (int i = 0; i < n; ++i) mean += alpha[std::size_t(i)] * v[std::size_t(i)] / beta;
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double var = (*hi - *lo) * (*hi - *lo) / beta;
        // every fourth case sits exactly on the boundary of the conditions
        const bool edge = c % 4 == 0;
        const double mu = edge ? mean : mean + 0.2 * core::uniform01(rng);
        const double s2 = edge ? var : var * (1.0 + core::uniform01(rng));
        auto r = gaussian_dirichlet_check(v, alpha, mu, s2, draws, rng);
        dominated += r.verdict.dominates;
        worst = std::min(worst, r.verdict.worst_margin);
        pass = pass && r.conditions_hold && r.verdict.dominates;
    }
    return {{"cases", cases}, {"dominated", dominated}, {"worst_margin", worst}, {"pass", pass}};
}

nlohmann::json check_visit_sums(core::Rng& rng, int streams, bool& pass) {
    pass = true;
    double ratio1 = 0, ratio2 = 0;
    for (int s = 0; s < streams; ++s) {
        const int L = draw_between(rng, 1, 200);
        auto stream = random_visit_stream(L, 3, 3, 2, rng);
        auto r = visit_sum_bounds(stream, 2.0, 3, 3, 2);
        pass = pass && r.holds1 && r.holds2;
        ratio1 = std::max(ratio1, r.lhs1 / r.rhs1);
        ratio2 = std::max(ratio2, r.lhs2 / r.rhs2);
    }
    return {{"streams", streams}, {"max_ratio1", ratio1}, {"max_ratio2", ratio2}, {"pass", pass}};
}

nlohmann::json check_gaussian_max(core::Rng& rng, int draws, bool& pass) {
    pass = true;
    nlohmann::json rows = nlohmann::json::array();
    for (int n : {1, 10, 100}) {
        std::vector<double> sigmas(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) sigmas[std::size_t(i)] = i % 2 == 0 ? 1.0 : 2.0;
        auto r = gaussian_max_bound_check(sigmas, draws, rng);
        pass = pass && r.holds;
        rows.push_back(r.to_json());
    }
    return {{"cases", rows}, {"pass", pass}};
}

}  // namespace

TheorySuiteResult run_theory_suite(std::uint64_t seed, const TheorySuiteOptions& opts) {
    TheorySuiteResult res;
    auto rng = [seed](const char* label) { return core::child_stream(seed, label); };
    auto r1 = rng("theory_planning_gap");
    auto r2 = rng("theory_gaussian_order");
    auto r3 = rng("theory_gaussian_dirichlet");
    auto r4 = rng("theory_visit_sums");
    auto r5 = rng("theory_gaussian_max");
    res.report["planning_bellman_gap"] = check_planning_gap(r1, opts.gap_mdps, res.planning_gap);
    res.report["increasing_convex_order"] = check_gaussian_order(r2, opts.dominance_draws, res.gaussian_order);
    res.report["gaussian_dirichlet"] =
        check_gaussian_dirichlet(r3, opts.dirichlet_cases, opts.dominance_draws, res.gaussian_dirichlet);
    res.report["visit_sum_bounds"] = check_visit_sums(r4, opts.visit_streams, res.visit_sums);
    res.report["gaussian_max"] = check_gaussian_max(r5, opts.max_draws, res.gaussian_max);
    res.report["seed"] = seed;
    res.report["pass"] = res.all();
    return res;
}

}  // namespace rve::theory
