#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rve/theory/bellman_gap.hpp"
#include "rve/theory/bounds.hpp"
#include "rve/theory/dominance.hpp"
#include "rve/theory/suite.hpp"

using namespace rve;
using namespace rve::theory;
using core::Rng;

namespace {

SampleSet gaussian(double mu, double sd, int n, Rng& rng, const char* label) {
    SampleSet s{{}, label};
    for (int i = 0; i < n; ++i) s.draws.push_back(mu + sd * core::std_normal(rng));
    return s;
}

}  // namespace

TEST(Dominance, ShiftedGaussianDominates) {
    Rng rng(1);
    auto x = gaussian(1, 1, 100000, rng, "x"), y = gaussian(0, 1, 100000, rng, "y");
    EXPECT_TRUE(increasing_convex_dominates(x, y).dominates);
    EXPECT_FALSE(increasing_convex_dominates(y, x).dominates);
}

TEST(Dominance, SmallerVarianceIsViolated) {
    Rng rng(2);
    auto x = gaussian(0, 1, 100000, rng, "x"), y = gaussian(0, 2, 100000, rng, "y");
    auto v = increasing_convex_dominates(x, y);
    EXPECT_FALSE(v.dominates);
    EXPECT_GT(v.worst_threshold, 0.0);  // the gap shows in the upper tail
    EXPECT_TRUE(increasing_convex_dominates(y, x).dominates);
}

TEST(Dominance, ConstantsAndEmptyInput) {
    SampleSet one{{1.0, 1.0, 1.0}, "one"}, zero{{0.0, 0.0}, "zero"}, empty{{}, "empty"};
    EXPECT_TRUE(increasing_convex_dominates(one, zero).dominates);
    EXPECT_FALSE(increasing_convex_dominates(zero, one).dominates);
    EXPECT_THROW(increasing_convex_dominates(empty, one), std::invalid_argument);
    SampleSet bad{{1.0, NAN}, "bad"};
    EXPECT_THROW(increasing_convex_dominates(bad, one), std::invalid_argument);
}

TEST(Dominance, StopLossMatchesDirectSumAndIsConvexDecreasing) {
    Rng rng(3);
    auto s = gaussian(0.3, 1.7, 500, rng, "s");
    StopLoss sl(s);
    auto grid = even_grid(sl.min() - 1, sl.max() + 1, 300);
    std::vector<double> curve;
    for (double t : grid) {
        double direct = 0, direct_sq = 0;
        for (double d : s.draws) {
            direct += std::max(0.0, d - t) / 500;
            direct_sq += std::pow(std::max(0.0, d - t), 2) / 500;
        }
        EXPECT_NEAR(sl.mean_excess(t), direct, 1e-12);
        const double se = std::sqrt(std::max(0.0, direct_sq - direct * direct) * 500 / 499 / 500);
        EXPECT_NEAR(sl.std_error(t), se, 1e-9);
        curve.push_back(sl.mean_excess(t));
    }
    for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i], curve[i - 1] + 1e-15);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) EXPECT_GE(curve[i - 1] + curve[i + 1] - 2 * curve[i], -1e-12);
}

TEST(GaussianDirichlet, LemmaConditionsGiveDominance) {
    Rng rng(4);
    const std::vector<double> v{0, 1}, alpha{1, 1};
    auto r = gaussian_dirichlet_check(v, alpha, 0.5, 0.5, 100000, rng);
    EXPECT_TRUE(r.conditions_hold);
    EXPECT_TRUE(r.verdict.dominates);
}

TEST(GaussianDirichlet, LowMeanIsViolatedAtLowThresholds) {
    Rng rng(5);
    const std::vector<double> v{0, 1}, alpha{1, 1};
    auto r = gaussian_dirichlet_check(v, alpha, 0.4, 0.5, 100000, rng);
    EXPECT_FALSE(r.conditions_hold);
    EXPECT_FALSE(r.verdict.dominates);
    EXPECT_LT(r.verdict.worst_threshold, 0.5);
}

TEST(GaussianDirichlet, ConstantValueAndBadInput) {
    Rng rng(6);
    const std::vector<double> v{2, 2, 2}, alpha{1, 1, 1};
    EXPECT_TRUE(gaussian_dirichlet_check(v, alpha, 2.0, 0.3, 20000, rng).verdict.dominates);
    const std::vector<double> small{0.5, 0.5, 0.5};
    EXPECT_THROW(gaussian_dirichlet_check(v, small, 2.0, 0.3, 100, rng), std::invalid_argument);
    EXPECT_THROW(gaussian_dirichlet_check(v, alpha, 2.0, 0.0, 100, rng), std::invalid_argument);
}

TEST(GaussianDirichlet, VerdictIsMonotoneInMean) {
    const std::vector<double> v{-1, 0.5, 2}, alpha{0.7, 1.0, 0.6};
    DominanceOptions o;
    o.grid = even_grid(-6, 8, 200);
    for (double mu : {-0.2, 0.0, 0.2, 0.3, 0.5}) {
        Rng a(7), b(7);
        auto base = gaussian_dirichlet_check(v, alpha, mu, 1.0, 20000, a, o);
        auto up = gaussian_dirichlet_check(v, alpha, mu + 0.1, 1.0, 20000, b, o);
        if (base.verdict.dominates) EXPECT_TRUE(up.verdict.dominates) << mu;
        EXPECT_GE(up.verdict.worst_margin, base.verdict.worst_margin);
    }
}

TEST(BellmanGap, OptimalQHasZeroGapAndZeroSides) {
    Rng rng(8);
    auto mdp = random_finite_mdp(4, 3, 2, rng);
    auto r = planning_bellman_gap(mdp, padded_optimal_q(mdp));
    for (std::size_t x = 0; x < r.lhs.size(); ++x) {
        EXPECT_NEAR(r.lhs[x], 0.0, 1e-12);
        EXPECT_NEAR(r.rhs[x], 0.0, 1e-12);
    }
    EXPECT_LT(r.gap, 1e-12);
}

TEST(BellmanGap, RandomSequencesSatisfyTheIdentity) {
    Rng rng(9);
    for (int c = 0; c < 100; ++c) {
        const int H = 1 + int(core::uniform_index(rng, 4)), X = 1 + int(core::uniform_index(rng, 4));
        const int A = 1 + int(core::uniform_index(rng, 3));
        auto mdp = random_finite_mdp(H, X, A, rng);
        envs::QTable q(H + 1, X, A);
        for (int t = 0; t < H; ++t)
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) q.at(t, x, a) = core::std_normal(rng);
        EXPECT_LT(planning_bellman_gap(mdp, q).gap, 1e-9);
    }
}

TEST(BellmanGap, ConstantShiftShowsOnBothSides) {
    Rng rng(10);
    auto mdp = random_finite_mdp(3, 4, 3, rng);
    auto q = padded_optimal_q(mdp);
    const double c = 0.37;
    for (int t = 0; t < 3; ++t)
        for (int x = 0; x < 4; ++x)
            for (int a = 0; a < 3; ++a) q.at(t, x, a) += c;
    auto r = planning_bellman_gap(mdp, q);
    for (std::size_t x = 0; x < 4; ++x) {
        EXPECT_NEAR(r.lhs[x], c, 1e-12);
        EXPECT_NEAR(r.rhs[x], c, 1e-12);
    }
}

TEST(BellmanGap, NonZeroTerminalTableThrows) {
    Rng rng(11);
    auto mdp = random_finite_mdp(2, 2, 2, rng);
    auto q = padded_optimal_q(mdp);
    q.at(2, 1, 0) = 1e-3;
    EXPECT_THROW(planning_bellman_gap(mdp, q), std::invalid_argument);
    envs::QTable short_q(2, 2, 2);
    EXPECT_THROW(planning_bellman_gap(mdp, short_q), std::invalid_argument);
}

TEST(BellmanGap, InvariantToStateRelabeling) {
    Rng rng(12);
    for (int c = 0; c < 10; ++c) {
        const int H = 3, X = 4, A = 2;
        auto mdp = random_finite_mdp(H, X, A, rng);
        envs::QTable q(H + 1, X, A);
        for (int t = 0; t < H; ++t)
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) q.at(t, x, a) = core::std_normal(rng);
        std::vector<int> perm(X);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = X - 1; i > 0; --i) std::swap(perm[i], perm[core::uniform_index(rng, i + 1)]);
        envs::FiniteMdp m2(H, X, A);
        envs::QTable q2(H + 1, X, A);
        for (int t = 0; t < H; ++t)
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) {
                    m2.r(t, perm[x], a) = mdp.r(t, x, a);
                    for (int y = 0; y < X; ++y) m2.p(t, perm[x], a)[perm[y]] = mdp.p(t, x, a)[y];
                    q2.at(t, perm[x], a) = q.at(t, x, a);
                }
        m2.initial = mdp.initial;
        auto r1 = planning_bellman_gap(mdp, q), r2 = planning_bellman_gap(m2, q2);
        for (int x = 0; x < X; ++x) {
            EXPECT_NEAR(r1.lhs[x], r2.lhs[perm[x]], 1e-12);
            EXPECT_NEAR(r1.rhs[x], r2.rhs[perm[x]], 1e-12);
        }
    }
}

TEST(VisitSums, SingleTripleExample) {
    VisitStream s(10, std::vector<Visit>{{0, 0, 0}});
    auto r = visit_sum_bounds(s, 2.0, 1, 1, 1);
    double expected = 0;
    for (int i = 0; i < 10; ++i) expected += 1.0 / (2 + i);
    EXPECT_NEAR(r.lhs1, expected, 1e-12);
    EXPECT_NEAR(r.lhs1, 2.0199, 1e-4);
    EXPECT_NEAR(r.rhs1, std::log(11.0), 1e-12);
    EXPECT_TRUE(r.holds1 && r.holds2);
}

TEST(VisitSums, RandomStreamsAlwaysHold) {
    Rng rng(13);
    for (int s = 0; s < 1000; ++s) {
        const int L = 1 + int(core::uniform_index(rng, 100));
        auto r = visit_sum_bounds(random_visit_stream(L, 3, 3, 2, rng), 2.0, 3, 3, 2);
        ASSERT_TRUE(r.holds1 && r.holds2) << s;
    }
    auto one = visit_sum_bounds(random_visit_stream(1, 4, 2, 3, rng), 5.0, 4, 2, 3);
    EXPECT_TRUE(one.holds1 && one.holds2);
}

TEST(VisitSums, BadInputThrows) {
    VisitStream s(1, std::vector<Visit>{{0, 0, 0}});
    EXPECT_THROW(visit_sum_bounds(s, 1.5, 1, 1, 1), std::invalid_argument);
    VisitStream out(1, std::vector<Visit>{{1, 0, 0}});
    EXPECT_THROW(visit_sum_bounds(out, 2.0, 1, 1, 1), std::out_of_range);
}

TEST(GaussianMax, SingleVariableAndTen) {
    Rng rng(14);
    auto one = gaussian_max_bound_check({1.0}, 100000, rng);
    EXPECT_EQ(one.max_bound, 0.0);
    EXPECT_TRUE(one.holds);
    auto ten = gaussian_max_bound_check(std::vector<double>(10, 1.0), 100000, rng);
    EXPECT_NEAR(ten.max_mean, 1.5388, 0.02);
    EXPECT_NEAR(ten.max_bound, std::sqrt(2 * std::log(10.0)), 1e-12);
    EXPECT_TRUE(ten.holds);
}

TEST(GaussianMax, HeterogeneousScales) {
    Rng rng(15);
    std::vector<double> sig;
    for (int i = 0; i < 20; ++i) sig.push_back(i % 2 ? 2.0 : 1.0);
    auto r = gaussian_max_bound_check(sig, 100000, rng);
    EXPECT_TRUE(r.holds);
    EXPECT_LE(r.weighted_mean, r.weighted_bound + 3 * r.weighted_se);
}

TEST(TheorySuite, SmallRunPassesAndReports) {
    TheorySuiteOptions o;
    o.gap_mdps = 10;
    o.dominance_draws = 20000;
    o.dirichlet_cases = 8;
    o.visit_streams = 50;
    o.max_draws = 20000;
    auto r = run_theory_suite(3, o);
    EXPECT_TRUE(r.all()) << r.report.dump(2);
    EXPECT_TRUE(r.report["pass"].get<bool>());
}
