#include <benchmark/benchmark.h>

#include "rve/agents/batch_agent.hpp"
#include "rve/agents/tabular.hpp"
#include "rve/core/live.hpp"
#include "rve/deep/encoder.hpp"
#include "rve/deep/td.hpp"
#include "rve/envs/deep_sea.hpp"
#include "rve/envs/feature_map.hpp"
#include "rve/regress/ridge.hpp"

using namespace rve;

namespace {

regress::RidgeProblem ridge_problem(int D, int n) {
    core::Rng rng(1);
    regress::RidgeProblem p;
    p.design = Eigen::MatrixXd(n, D);
    p.targets = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < D; ++j) p.design(i, j) = core::std_normal(rng);
        p.targets[i] = core::std_normal(rng);
    }
    p.prior_mean = Eigen::VectorXd::Zero(D);
    return p;
}

void BM_RidgePosterior(benchmark::State& state) {
    auto p = ridge_problem(int(state.range(0)), 4 * int(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(regress::ridge_posterior(p).mean);
}
BENCHMARK(BM_RidgePosterior)->Arg(10)->Arg(40)->Arg(160);

void BM_PerturbedRidgeSample(benchmark::State& state) {
    auto p = ridge_problem(int(state.range(0)), 4 * int(state.range(0)));
    core::Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(regress::perturbed_ridge_sample(p, rng));
}
BENCHMARK(BM_PerturbedRidgeSample)->Arg(10)->Arg(40);

// one 128-transition TD step on the 50-50 network with pixel inputs
void BM_TdLossAndGrad(benchmark::State& state) {
    const int n = int(state.range(0));
    core::Rng rng(3);
    deep::MlpShape shape{n * n, {50, 50}, 2};
    auto theta = deep::PriorNetPair::init(shape, rng);
    deep::DeepSeaPixelEncoder enc(n);
    std::vector<deep::SparseEntries> xs(128), xn(128);
    std::vector<const deep::SparseEntries*> cx, cn;
    deep::TdBatch b;
    for (int j = 0; j < 128; ++j) {
        const int row = int(core::uniform_index(rng, n - 1)), col = int(core::uniform_index(rng, row + 1));
        enc.encode(core::State{row, col, {}}, xs[j]);
        enc.encode(core::State{row + 1, std::min(col + 1, row + 1), {}}, xn[j]);
        cx.push_back(&xs[j]);
        cn.push_back(&xn[j]);
        b.actions.push_back(j % 2);
        b.rewards.push_back(0.0);
        b.next_col.push_back(j);
    }
    b.x = deep::make_batch(n * n, cx);
    b.x_next = deep::make_batch(n * n, cn);
    b.prior_x = theta.prior_batch(b.x);
    b.prior_next = theta.prior_batch(b.x_next);
    for (auto _ : state) benchmark::DoNotOptimize(deep::td_loss_and_grad(theta, theta, b, 0.99).loss);
}
BENCHMARK(BM_TdLossAndGrad)->Arg(10)->Arg(20);

// full RLSVI learn step after a few hundred episodes of data
void BM_LinearRlsviLearn(benchmark::State& state) {
    const int n = int(state.range(0));
    envs::DeepSeaConfig cfg;
    cfg.size_n = n;
    envs::DeepSea env(cfg);
    auto streams = core::RunStreams::from_root(4);
    auto fm = std::make_shared<envs::FeatureMap>(envs::make_feature_map(cfg, 10, 0.0, streams.build));
    agents::BatchAgentOptions o;
    o.params.horizon = n;
    o.params.prior_var = 100;
    o.params.noise_var = 0.01;
    agents::BatchAgent agent(std::make_shared<agents::RowFeatureFamily>(fm), o);
    core::live(agent, env, 200, streams);
    core::Rng rng(5);
    for (auto _ : state) {
        agent.learn_from_buffer(rng);
        benchmark::DoNotOptimize(agent.theta());
    }
}
BENCHMARK(BM_LinearRlsviLearn)->Arg(10)->Arg(30)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_TabularRlsviLearn(benchmark::State& state) {
    const int n = int(state.range(0));
    envs::DeepSeaConfig cfg;
    cfg.size_n = n;
    envs::DeepSea env(cfg);
    auto streams = core::RunStreams::from_root(6);
    agents::TabularRlsviAgent agent(n, n, 2, {0.1, 0.1, 0.0});
    core::live(agent, env, 200, streams);
    core::Rng rng(7);
    for (auto _ : state) {
        agent.learn_from_buffer(rng);
        benchmark::DoNotOptimize(agent.q().q.data());
    }
}
BENCHMARK(BM_TabularRlsviLearn)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
