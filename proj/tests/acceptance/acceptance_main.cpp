// Acceptance run: one PASS/FAIL line per criterion, assertion details
// indented underneath. Experiments use their default configs; outputs land
// in --out (default ./acceptance_results). Criterion 9 runs only with
// RVE_ACCEPTANCE_NIGHTLY=1.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "rve/deep/td.hpp"
#include "rve/harness/experiment.hpp"
#include "rve/regress/ridge.hpp"

using namespace rve;
using harness::ExperimentId;

namespace {

struct Verdict {
    bool passed = false;
    std::vector<std::string> details;
};

// tolerances for criterion 12
constexpr int kRidgeDraws = 100000;
constexpr double kRidgeMeanTol = 0.01;
constexpr double kRidgeCovTol = 0.05;
constexpr int kGradientCases = 50;
constexpr double kGradientRelTol = 1e-4;
constexpr double kBlockSolveTol = 1e-10;

harness::ResultSet run(ExperimentId id, const std::string& out, int workers,
                       std::map<ExperimentId, harness::ResultSet>& cache) {
    if (auto it = cache.find(id); it != cache.end()) return it->second;
    auto cfg = harness::ExperimentConfig::defaults(id);
    cfg.set("workers", std::to_string(workers));
    cfg.set("out", out + "/" + harness::to_string(id));
    const auto t0 = std::chrono::steady_clock::now();
    auto result = harness::run_experiment(cfg);
    harness::emit_outputs(result, cfg.get("out"));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << harness::to_string(id) << " finished in " << secs << " s" << std::endl;
    cache[id] = result;
    return result;
}

Verdict from_assertions(const harness::ResultSet& r, const std::vector<std::string>& names) {
    Verdict v{true, {}};
    std::set<std::string> wanted(names.begin(), names.end());
    int seen = 0;
    for (const auto& a : r.assertions) {
        if (!wanted.empty() && !wanted.count(a.name) && a.name != "all_runs_completed") continue;
        ++seen;
        v.passed = v.passed && a.passed;
        v.details.push_back(std::string(a.passed ? "ok   " : "FAIL ") + a.name + ": " + a.detail);
    }
    if (seen == 0) {
        v.passed = false;
        v.details.push_back("no assertions evaluated");
    }
    return v;
}

Eigen::VectorXd normal_vector(int n, core::Rng& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = core::std_normal(rng);
    return v;
}

regress::RidgeProblem random_problem(core::Rng& rng, int D, int n, double v, double lambda) {
    regress::RidgeProblem p;
    p.design = Eigen::MatrixXd(n, D);
    for (int i = 0; i < n; ++i) p.design.row(i) = normal_vector(D, rng).transpose();
    p.targets = normal_vector(n, rng);
    p.prior_mean = normal_vector(D, rng);
    p.noise_var = v;
    p.prior_var = lambda;
    return p;
}

Verdict numerical_kernels() {
    Verdict v{true, {}};
    core::Rng rng(12);
    std::ostringstream os;

    // perturbed ridge draws against the exact posterior
    {
        auto p = random_problem(rng, 3, 6, 1.0, 1.0);
        auto post = regress::ridge_posterior(p);
        const Eigen::MatrixXd cov = post.covariance();
        Eigen::VectorXd m = Eigen::VectorXd::Zero(3);
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
        for (int i = 0; i < kRidgeDraws; ++i) {
            Eigen::VectorXd s = regress::perturbed_ridge_sample(p, rng) - post.mean;
            m += s;
            c += s * s.transpose();
        }
        m /= kRidgeDraws;
        c = c / kRidgeDraws - m * m.transpose();
        double mean_err = 0, cov_err = 0;
        for (int i = 0; i < 3; ++i) {
            // mean error relative to the posterior scale of that coordinate
            mean_err = std::max(mean_err, std::abs(m(i)) / std::max(std::abs(post.mean(i)), std::sqrt(cov(i, i))));
            for (int j = 0; j < 3; ++j)
                cov_err = std::max(cov_err, std::abs(c(i, j) - cov(i, j)) / std::sqrt(cov(i, i) * cov(j, j)));
        }
        const bool ok = mean_err <= kRidgeMeanTol && cov_err <= kRidgeCovTol;
        v.passed = v.passed && ok;
        os.str("");
        os << (ok ? "ok   " : "FAIL ") << "perturbed ridge: mean rel err " << mean_err << ", cov rel err " << cov_err;
        v.details.push_back(os.str());
    }

    // TD loss gradient through the MLP against central differences
    {
        using namespace deep;
        const double h = 1e-5;
        double worst = 0;
        int cases = 0, rejected = 0;
        while (cases < kGradientCases) {
            MlpShape s;
            s.input_dim = 1 + int(core::uniform_index(rng, 6));
            const int layers = 1 + int(core::uniform_index(rng, 2));
            for (int l = 0; l < layers; ++l) s.hidden.push_back(1 + int(core::uniform_index(rng, 8)));
            s.num_outputs = 1 + int(core::uniform_index(rng, 3));
            auto theta = PriorNetPair::init(s, rng, core::uniform01(rng) < 0.5);
            for (int l = 0; l < s.num_layers(); ++l) theta.trainable.biases[l] = 0.1 * normal_vector(s.layer_out(l), rng);
            auto target = PriorNetPair::init(s, rng);
            const int B = 1 + int(core::uniform_index(rng, 8));
            Eigen::MatrixXd x(s.input_dim, B), xn(s.input_dim, B);
            TdBatch b;
            int nn = 0;
            for (int j = 0; j < B; ++j) {
                x.col(j) = normal_vector(s.input_dim, rng);
                b.actions.push_back(int(core::uniform_index(rng, s.num_outputs)));
                b.rewards.push_back(core::std_normal(rng));
                if (core::uniform01(rng) < 0.7) {
                    xn.col(nn) = normal_vector(s.input_dim, rng);
                    b.next_col.push_back(nn++);
                } else {
                    b.next_col.push_back(-1);
                }
            }
            b.x = dense_to_batch(x);
            b.x_next = dense_to_batch(xn.leftCols(nn));
            // skip cases with a ReLU input at its kink
            ForwardCache fc;
            mlp_forward_batch(theta.trainable, b.x, &fc);
            double kink = 1e300;
            for (std::size_t l = 0; l + 1 < fc.pre.size(); ++l) kink = std::min(kink, fc.pre[l].cwiseAbs().minCoeff());
            if (kink < 1e-6) {
                ++rejected;
                continue;
            }
            ++cases;
            const auto g = td_loss_and_grad(theta, target, b, 0.9).grad.flatten();
            const auto flat = theta.trainable.flatten();
            for (std::size_t i = 0; i < flat.size(); ++i) {
                auto plus = theta, minus = theta;
                auto fp = flat, fm = flat;
                fp[i] += h;
                fm[i] -= h;
                plus.trainable.unflatten(fp);
                minus.trainable.unflatten(fm);
                const double fd =
                    (td_loss_and_grad(plus, target, b, 0.9).loss - td_loss_and_grad(minus, target, b, 0.9).loss) / (2 * h);
                worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-3}));
            }
        }
        const bool ok = worst < kGradientRelTol;
        v.passed = v.passed && ok;
        os.str("");
        os << (ok ? "ok   " : "FAIL ") << "MLP gradient: worst rel err " << worst << " over " << cases << " cases ("
           << rejected << " kink cases redrawn)";
        v.details.push_back(os.str());
    }

    // block solve against one full solve of the block-diagonal problem
    {
        const int N = 6, M = 4, D = N * M;
        std::vector<regress::RidgeProblem> blocks;
        regress::RidgeProblem full;
        full.noise_var = 0.3;
        full.prior_var = 5.0;
        full.prior_mean = Eigen::VectorXd(D);
        std::vector<Eigen::VectorXd> rows;
        std::vector<double> ys;
        for (int b = 0; b < N; ++b) {
            auto p = random_problem(rng, M, 2 + 2 * b, full.noise_var, full.prior_var);
            full.prior_mean.segment(b * M, M) = p.prior_mean;
            for (int i = 0; i < p.design.rows(); ++i) {
                Eigen::VectorXd r = Eigen::VectorXd::Zero(D);
                r.segment(b * M, M) = p.design.row(i).transpose();
                rows.push_back(r);
                ys.push_back(p.targets[i]);
            }
            blocks.push_back(std::move(p));
        }
        full.design = Eigen::MatrixXd(rows.size(), D);
        full.targets = Eigen::VectorXd(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            full.design.row(i) = rows[i].transpose();
            full.targets[i] = ys[i];
        }
        const auto parts = regress::block_solve(blocks);
        const auto whole = regress::ridge_posterior(full).mean;
        double err = 0;
        for (int b = 0; b < N; ++b) err = std::max(err, (parts[b] - whole.segment(b * M, M)).cwiseAbs().maxCoeff());
        const bool ok = err < kBlockSolveTol;
        v.passed = v.passed && ok;
        os.str("");
        os << (ok ? "ok   " : "FAIL ") << "block solve: max abs diff " << err;
        v.details.push_back(os.str());
    }
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string out = "acceptance_results";
    std::vector<int> only;
    int workers = 1;
    app.add_option("--out", out, "directory for experiment outputs");
    app.add_option("--only", only, "criteria to run (default all)")->delimiter(',');
    app.add_option("--workers", workers, "parallel seed workers")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const char* nightly_env = std::getenv("RVE_ACCEPTANCE_NIGHTLY");
    const bool nightly = nightly_env && std::string(nightly_env) == "1";

    struct Criterion {
        int number;
        std::string name;
        std::function<Verdict()> check;
    };
    std::map<ExperimentId, harness::ResultSet> cache;
    auto exp = [&](ExperimentId id, std::vector<std::string> names = {}) {
        return [&, id, names] { return from_assertions(run(id, out, workers, cache), names); };
    };
    const std::vector<Criterion> criteria = {
        {1, "deep-sea separation",
         exp(ExperimentId::tabular_compare, {"rlsvi_learns_every_treasure_seed",
                                             "boltzmann_fails_on_four_fifths_of_treasure_seeds",
                                             "egreedy_fails_on_four_fifths_of_treasure_seeds"})},
        {2, "baseline ordering", exp(ExperimentId::tabular_compare, {"regret_ordering_psrl_rlsvi_ucrl2"})},
        {3, "linear scaling", exp(ExperimentId::linear_scaling)},
        {4, "feature threshold", exp(ExperimentId::feature_scaling)},
        {5, "misspecification robustness", exp(ExperimentId::misspecification)},
        {6, "parameter sensitivity", exp(ExperimentId::param_sweep)},
        {7, "ensemble size", exp(ExperimentId::ensemble_size)},
        {8, "representation scaling", exp(ExperimentId::representation_scaling)},
        {9, "cartpole swing-up",
         [&]() -> Verdict {
             if (!nightly) return {false, {"not run: nightly criterion, set RVE_ACCEPTANCE_NIGHTLY=1"}};
             return from_assertions(run(ExperimentId::cartpole, out, workers, cache), {});
         }},
        {10, "Bayesian regret scaling", exp(ExperimentId::dirichlet_regret)},
        {11, "theory suite", exp(ExperimentId::theory_suite)},
        {12, "numerical kernels", numerical_kernels},
    };

    bool all = true;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, {std::string("error: ") + e.what()}};
        }
        all = all && v.passed;
        std::cout << (v.passed ? "PASS" : "FAIL") << " criterion " << c.number << " (" << c.name << ")\n";
        for (const auto& d : v.details) std::cout << "    " << d << "\n";
        std::cout << std::flush;
    }
    return all ? 0 : 1;
}
