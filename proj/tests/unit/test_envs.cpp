#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>

#include "rve/envs/cartpole.hpp"
#include "rve/envs/deep_sea.hpp"
#include "rve/envs/feature_map.hpp"
#include "rve/envs/tabular_mdp.hpp"

using namespace rve;
using core::Rng;
using envs::Cell;

namespace {

envs::DeepSeaConfig sea(int n, bool treasure = true, std::uint64_t seed = 1) {
    envs::DeepSeaConfig c;
    c.size_n = n;
    c.has_treasure = treasure;
    c.assoc_seed = seed;
    return c;
}

}  // namespace

TEST(DeepSeaStep, RightFromOriginPaysCost) {
    envs::DeepSeaLayout l(sea(10));
    int right = l.right_action({0, 0});
    auto s = envs::deep_sea_step(l, {0, 0}, right);
    EXPECT_DOUBLE_EQ(s.reward, -0.001);
    ASSERT_TRUE(s.next);
    EXPECT_EQ(*s.next, (Cell{1, 1}));
}

TEST(DeepSeaStep, LeftIsFreeEverywhere) {
    envs::DeepSeaLayout l(sea(7, true, 3));
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) {
            auto s = envs::deep_sea_step(l, {r, c}, 1 - l.right_action({r, c}));
            EXPECT_EQ(s.reward, 0.0);
            if (r + 1 < 7) EXPECT_EQ(s.next->col, std::max(c - 1, 0));
        }
}

TEST(DeepSeaStep, ChestPayoffAndTermination) {
    envs::DeepSeaLayout t(sea(10, true)), b(sea(10, false));
    auto s = envs::deep_sea_step(t, {9, 9}, t.right_action({9, 9}));
    EXPECT_NEAR(s.reward, 0.999, 1e-15);
    EXPECT_FALSE(s.next);
    auto sb = envs::deep_sea_step(b, {9, 9}, b.right_action({9, 9}));
    EXPECT_NEAR(sb.reward, -1.001, 1e-15);
}

TEST(DeepSeaStep, OffDiagonalRightIsFreeAndSaturates) {
    envs::DeepSeaLayout l(sea(5));
    auto s = envs::deep_sea_step(l, {2, 0}, l.right_action({2, 0}));
    EXPECT_EQ(s.reward, 0.0);
    EXPECT_EQ(*s.next, (Cell{3, 1}));
    auto e = envs::deep_sea_step(l, {1, 4}, l.right_action({1, 4}));
    EXPECT_EQ(e.next->col, 4);
}

TEST(DeepSeaStep, RejectsBadInputs) {
    envs::DeepSeaLayout l(sea(4));
    EXPECT_THROW(envs::deep_sea_step(l, {4, 0}, 0), std::out_of_range);
    EXPECT_THROW(envs::deep_sea_step(l, {0, -1}, 0), std::out_of_range);
    EXPECT_THROW(envs::deep_sea_step(l, {0, 0}, 2), std::out_of_range);
}

TEST(DeepSeaStep, AlwaysRightModeFixesAssociation) {
    auto c = sea(6);
    c.observation_mode = envs::ObservationMode::always_right_pixel;
    envs::DeepSeaLayout l(c);
    for (int r = 0; r < 6; ++r)
        for (int k = 0; k < 6; ++k) EXPECT_EQ(l.right_action({r, k}), 1);
}

TEST(DeepSeaObserve, PixelAndTabular) {
    auto c = sea(3);
    c.observation_mode = envs::ObservationMode::pixel;
    auto o = envs::deep_sea_observe(c, {0, 0});
    ASSERT_EQ(o.grid.size(), 9u);
    EXPECT_EQ(o.grid[0], 1.0);
    for (int i = 1; i < 9; ++i) EXPECT_EQ(o.grid[i], 0.0);
    c.observation_mode = envs::ObservationMode::tabular;
    EXPECT_EQ(envs::deep_sea_observe(c, {2, 1}).index, 7);
    c.observation_mode = envs::ObservationMode::pixel;
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        Cell cell{int(rng() % 3), int(rng() % 3)};
        auto g = envs::deep_sea_observe(c, cell).grid;
        int nz = 0;
        for (double v : g) nz += v != 0.0;
        EXPECT_EQ(nz, 1);
        EXPECT_EQ(g[cell.row * 3 + cell.col], 1.0);
    }
}

TEST(DeepSeaEnv, EpisodesLastExactlyN) {
    Rng pol(11);
    for (int n : {1, 2, 5, 13}) {
        envs::DeepSea env(sea(n, n % 2 == 0, n));
        Rng rng(n);
        for (int ep = 0; ep < 20; ++ep) {
            env.reset(rng);
            int steps = 0;
            for (;;) {
                ++steps;
                auto r = env.step(int(pol() & 1), rng);
                if (!r.next) break;
            }
            EXPECT_EQ(steps, n);
        }
    }
}

TEST(DeepSeaEnv, NoisyRewardsKeepMeans) {
    auto c = sea(4);
    c.reward_noise_sd = 1.0;
    envs::DeepSea env(c);
    Rng rng(5);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        env.reset(rng);
        auto r = env.step(1 - env.layout().right_action({0, 0}), rng);  // left: mean 0
        sum += r.reward;
        sq += r.reward * r.reward;
    }
    EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(ValueIteration, ZeroHorizonIsZero) {
    envs::FiniteMdp m(3, 2, 2);
    for (auto& r : m.reward) r = 1.0;
    for (int t = 0; t < 3; ++t)
        for (int x = 0; x < 2; ++x)
            for (int a = 0; a < 2; ++a) m.p(t, x, a)[0] = 1.0;
    auto q = envs::value_iteration(m, 0);
    for (double v : q.q) EXPECT_EQ(v, 0.0);
    envs::FiniteMdp empty(0, 2, 2);
    EXPECT_EQ(envs::value_iteration(empty).value(0, 0), 0.0);
}

TEST(ValueIteration, DeepSeaClosedForm) {
    for (int n = 2; n <= 50; ++n) {
        for (bool treasure : {true, false}) {
            auto m = envs::deep_sea_model(envs::DeepSeaLayout(sea(n, treasure, n * 7)));
            auto q = envs::value_iteration(m);
            EXPECT_NEAR(q.value(0, 0), treasure ? 0.99 : 0.0, 1e-12) << n;
        }
    }
}

TEST(ValueIteration, PolicyEvaluationOfGreedyMatchesOptimum) {
    Rng rng(21);
    std::vector<double> alpha(6, 0.5);
    for (int rep = 0; rep < 10; ++rep) {
        auto m = envs::sample_dirichlet_mdp(4, 3, 2, alpha, rng).to_finite();
        auto q = envs::value_iteration(m);
        auto v = envs::policy_evaluation(m, envs::greedy_policy(q));
        for (int x = 0; x < 3; ++x) EXPECT_NEAR(v[x], q.value(0, x), 1e-12);
    }
}

TEST(Cartpole, HangingEquilibrium) {
    envs::CartpoleState s{std::numbers::pi, 0, 0, 0, 0};
    auto a = envs::cartpole_accelerations(s, 0.0);
    EXPECT_NEAR(a.theta_ddot, 0.0, 1e-14);
    EXPECT_NEAR(a.x_ddot, 0.0, 1e-14);
}

TEST(Cartpole, UprightEquilibriumRewarded) {
    envs::CartpoleState s{0, 0, 0, 0, 0};
    auto a = envs::cartpole_accelerations(s, 0.0);
    EXPECT_EQ(a.theta_ddot, 0.0);
    EXPECT_EQ(a.x_ddot, 0.0);
    auto r = envs::cartpole_step(s, 0.0);
    EXPECT_EQ(r.reward, 1.0);
    for (int i = 0; i < 100; ++i) s = envs::cartpole_step(s, 0.0).next;
    EXPECT_LT(std::abs(s.theta), 1e-9);
}

TEST(Cartpole, HorizontalPoleAcceleration) {
    envs::CartpoleState s{std::numbers::pi / 2, 0, 0, 0, 0};
    auto a = envs::cartpole_accelerations(s, 0.0);
    EXPECT_NEAR(a.tau, 0.0, 1e-15);
    // 9.8 / (0.5 * 4/3), since cos = 0 removes the mass-ratio term
    EXPECT_NEAR(a.theta_ddot, 14.7, 1e-12);
    EXPECT_NEAR(a.x_ddot, 0.0, 1e-14);
}

TEST(Cartpole, ActionCostAndForceValidation) {
    envs::CartpoleState s{std::numbers::pi, 0, 0, 0, 0};
    EXPECT_NEAR(envs::cartpole_step(s, 10.0).reward, -0.01, 1e-15);
    EXPECT_THROW(envs::cartpole_step(s, 5.0), std::invalid_argument);
}

TEST(Cartpole, SemiImplicitEulerOrder) {
    envs::CartpoleState s{1.0, 0.5, 0.2, -0.3, 0};
    auto a = envs::cartpole_accelerations(s, 10.0);
    auto n = envs::cartpole_step(s, 10.0).next;
    EXPECT_DOUBLE_EQ(n.theta_dot, 0.5 + 0.01 * a.theta_ddot);
    EXPECT_DOUBLE_EQ(n.theta, 1.0 + 0.01 * n.theta_dot);
    EXPECT_DOUBLE_EQ(n.x, 0.2 + 0.01 * n.x_dot);
}

TEST(Cartpole, RailIsRigid) {
    envs::CartpoleState s{std::numbers::pi, 0, 4.999, 3.0, 0};
    auto n = envs::cartpole_step(s, 10.0).next;
    EXPECT_EQ(n.x, 5.0);
    EXPECT_EQ(n.x_dot, 0.0);
}

TEST(Cartpole, EpisodeEndsAfterTenSeconds) {
    envs::Cartpole env;
    Rng rng(1);
    auto s = env.reset(rng);
    EXPECT_NEAR(std::abs(s.values[0]), std::numbers::pi, 0.06);
    int steps = 0;
    for (;;) {
        ++steps;
        if (!env.step(1, rng).next) break;
    }
    EXPECT_EQ(steps, 1001);
}

TEST(Cartpole, AngleWrap) {
    EXPECT_NEAR(envs::wrap_angle(std::numbers::pi + 0.1), -std::numbers::pi + 0.1, 1e-12);
    EXPECT_NEAR(envs::wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
    EXPECT_NEAR(envs::wrap_angle(0.3), 0.3, 1e-15);
}

TEST(Dirichlet, SimplexAndMean) {
    Rng rng(31);
    std::vector<double> alpha{0.5, 1.5, 0.25, 0.75, 1.0, 0.0};  // beta = 4
    const int draws = 10000;
    std::vector<double> mean(6, 0.0), sq(6, 0.0);
    for (int i = 0; i < draws; ++i) {
        auto m = envs::sample_dirichlet_mdp(1, 3, 1, alpha, rng);
        double s = 0;
        for (int o = 0; o < 6; ++o) {
            double p = m.outcomes(0, 0, 0)[o];
            s += p;
            mean[o] += p / draws;
            sq[o] += p * p / draws;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    for (int o = 0; o < 6; ++o) {
        double se = std::sqrt(std::max(sq[o] - mean[o] * mean[o], 0.0) / draws);
        EXPECT_NEAR(mean[o], alpha[o] / 4.0, 3 * se + 1e-15) << o;
    }
}

TEST(Dirichlet, PointMassAndValidation) {
    Rng rng(32);
    std::vector<double> alpha{2.0, 0, 0, 0};
    auto m = envs::sample_dirichlet_mdp(2, 2, 2, alpha, rng);
    for (int t = 0; t < 2; ++t)
        for (int x = 0; x < 2; ++x)
            for (int a = 0; a < 2; ++a) EXPECT_EQ(m.outcomes(t, x, a)[0], 1.0);
    std::vector<double> small{0.5, 0.5, 0.5, 0.4};
    EXPECT_THROW(envs::sample_dirichlet_mdp(1, 2, 1, small, rng), std::invalid_argument);
}

TEST(TabularMdp, JsonRoundTripAndFiniteConversion) {
    Rng rng(33);
    std::vector<double> alpha(4, 0.5);
    auto m = envs::sample_dirichlet_mdp(3, 2, 2, alpha, rng);
    auto back = envs::TabularMdp::from_json(nlohmann::json::parse(m.to_json().dump()));
    EXPECT_EQ(back.outcome_probs, m.outcome_probs);
    auto f = m.to_finite();
    f.validate(1e-12);
    const double* o = m.outcomes(1, 1, 0);
    EXPECT_NEAR(f.r(1, 1, 0), o[2] + o[3], 1e-15);
    EXPECT_NEAR(f.p(1, 1, 0)[0], o[0] + o[2], 1e-15);
}

TEST(TabularEnv, EmpiricalOutcomeFrequencies) {
    envs::TabularMdp m;
    m.horizon = 1;
    m.num_states = 2;
    m.num_actions = 1;
    m.initial = {1.0, 0.0};
    m.outcome_probs = {0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.25, 0.25};
    envs::TabularEnv env(m);
    Rng rng(34);
    double rsum = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        env.reset(rng);
        auto r = env.step(0, rng);
        EXPECT_FALSE(r.next);
        rsum += r.reward;
    }
    EXPECT_NEAR(rsum / n, 0.7, 0.01);
}

namespace {

// residual of projecting v onto span of the columns of B
double projection_residual(const Eigen::MatrixXd& B, const Eigen::VectorXd& v) {
    Eigen::VectorXd coef = B.colPivHouseholderQr().solve(v);
    return (B * coef - v).norm();
}

Eigen::MatrixXd row_basis(const envs::FeatureMap& fm, int row) {
    Eigen::MatrixXd B(2 * fm.size_n(), fm.m_per_row());
    for (int m = 0; m < fm.m_per_row(); ++m) B.col(m) = fm.row_vector(row, m);
    return B;
}

}  // namespace

TEST(FeatureMap, SpansBothOptimaAtFullRank) {
    for (bool treasure : {true, false}) {
        auto cfg = sea(6, treasure, 9);
        Rng rng(41);
        auto fm = envs::make_feature_map(cfg, 12, 0.0, rng);
        auto c2 = cfg;
        c2.has_treasure = !treasure;
        auto q1 = envs::value_iteration(envs::deep_sea_model(envs::DeepSeaLayout(cfg)));
        auto q2 = envs::value_iteration(envs::deep_sea_model(envs::DeepSeaLayout(c2)));
        for (int r = 0; r < 6; ++r) {
            auto B = row_basis(fm, r);
            EXPECT_LT(projection_residual(B, envs::deep_sea_qstar_row(q1, r)), 1e-8);
            EXPECT_LT(projection_residual(B, envs::deep_sea_qstar_row(q2, r)), 1e-8);
        }
    }
}

TEST(FeatureMap, SpansBothOptimaWithFewFeatures) {
    auto cfg = sea(10, true, 2);
    Rng rng(42);
    auto fm = envs::make_feature_map(cfg, 2, 0.0, rng);
    auto c2 = cfg;
    c2.has_treasure = false;
    auto q1 = envs::value_iteration(envs::deep_sea_model(envs::DeepSeaLayout(cfg)));
    auto q2 = envs::value_iteration(envs::deep_sea_model(envs::DeepSeaLayout(c2)));
    for (int r = 0; r < 10; ++r) {
        auto B = row_basis(fm, r);
        EXPECT_LT(projection_residual(B, envs::deep_sea_qstar_row(q1, r)), 1e-8);
        EXPECT_LT(projection_residual(B, envs::deep_sea_qstar_row(q2, r)), 1e-8);
    }
}

TEST(FeatureMap, SingleFeatureTinyCase) {
    auto cfg = sea(2, true, 4);
    Rng rng(43);
    auto fm = envs::make_feature_map(cfg, 1, 0.0, rng);
    auto q = envs::value_iteration(envs::deep_sea_model(envs::DeepSeaLayout(cfg)));
    for (int r = 0; r < 2; ++r) EXPECT_LT(projection_residual(row_basis(fm, r), envs::deep_sea_qstar_row(q, r)), 1e-8);
}

TEST(FeatureMap, UnitNormAndNoiseSupport) {
    auto cfg = sea(5);
    Rng rng(44);
    auto fm = envs::make_feature_map(cfg, 4, 0.0, rng);
    for (int r = 0; r < 5; ++r)
        for (int m = 0; m < 4; ++m) EXPECT_NEAR(fm.row_vector(r, m, false).norm(), 1.0, 1e-12);
    Rng rng2(45);
    auto noisy = envs::make_feature_map(cfg, 4, 0.5, rng2);
    double sq = 0;
    int cnt = 0;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            for (int a = 0; a < 2; ++a)
                for (int m = 0; m < 4; ++m) {
                    double e = noisy.noise(r, c, a)[m];
                    sq += e * e;
                    ++cnt;
                    EXPECT_DOUBLE_EQ(noisy.features(r, c, a)[m], noisy.clean(r, c, a)[m] + e);
                }
    EXPECT_NEAR(sq / cnt, 0.5, 0.15);
}
