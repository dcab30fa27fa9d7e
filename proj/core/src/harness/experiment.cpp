#include "rve/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rve/agents/batch_agent.hpp"
#include "rve/agents/tabular.hpp"
#include "rve/baselines/psrl.hpp"
#include "rve/baselines/ucrl2.hpp"
#include "rve/core/live.hpp"
#include "rve/deep/ensemble.hpp"
#include "rve/envs/cartpole.hpp"
#include "rve/envs/deep_sea.hpp"
#include "rve/envs/feature_map.hpp"
#include "rve/envs/tabular_mdp.hpp"
#include "rve/theory/suite.hpp"

namespace rve::harness {

namespace {

using nlohmann::json;

struct Job {
    int cell = 0;
    int slot = 0;
    std::uint64_t seed = 0;
    std::function<SeedRun()> run;
};

struct Plan {
    ResultSet result;
    std::vector<Job> jobs;

    int add_cell(std::string label, json params) {
        result.cells.push_back({std::move(label), std::move(params), {}});
        return int(result.cells.size()) - 1;
    }
    void add_run(int cell, std::uint64_t seed, std::function<SeedRun()> fn) {
        auto& c = result.cells[cell];
        c.runs.push_back({});
        c.runs.back().seed = seed;
        jobs.push_back({cell, int(c.runs.size()) - 1, seed, std::move(fn)});
    }
};

std::string label_number(double v) { return format_double(v); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

struct LiveSettings {
    int episodes = 0;
    bool realized = false;
    bool stop_at_learning_time = false;
};

SeedRun run_live(core::Agent& agent, core::Environment& env, core::RunStreams& streams, std::uint64_t seed,
                 const LiveSettings& s) {
    core::LiveOptions lo;
    lo.realized_regret = s.realized;
    if (s.stop_at_learning_time)
        lo.stop = [](const core::RegretTrace& t) { return core::learning_time(t).has_value(); };
    SeedRun r;
    r.seed = seed;
    r.trace = core::live(agent, env, s.episodes, streams, lo);
    r.trace.seed = seed;
    r.learning_time = core::learning_time(r.trace);
    return r;
}

LiveSettings live_settings(const ExperimentConfig& c) {
    LiveSettings s;
    s.episodes = int(c.get_int("episodes"));
    s.realized = c.get_bool("realized_regret");
    if (c.has("stop_at_learning_time")) s.stop_at_learning_time = c.get_bool("stop_at_learning_time");
    require(s.episodes > 0, "episodes must be positive");
    return s;
}

envs::DeepSeaConfig sea(int n, bool treasure, std::uint64_t seed, double noise_sd = 0.0,
                        envs::ObservationMode mode = envs::ObservationMode::tabular) {
    envs::DeepSeaConfig cfg;
    cfg.size_n = n;
    cfg.has_treasure = treasure;
    cfg.assoc_seed = seed;
    cfg.reward_noise_sd = noise_sd;
    cfg.observation_mode = mode;
    return cfg;
}

// Gaussian-perturbed RLSVI with a coherent row basis on a treasure instance.
std::function<SeedRun()> linear_rlsvi_job(int n, int m, double psi, agents::LearnMode mode, double prior_var,
                                          double noise_var, double reward_noise_sd, std::uint64_t seed,
                                          LiveSettings live) {
    require(n >= 2 && m >= 1, "deep-sea size must be at least 2 and features per row at least 1");
    require(prior_var > 0 && noise_var > 0, "prior and noise variances must be positive");
    require(psi >= 0 && reward_noise_sd >= 0, "noise scales must be non-negative");
    return [=] {
        auto streams = core::RunStreams::from_root(seed);
        const auto cfg = sea(n, true, seed, reward_noise_sd);
        envs::DeepSea env(cfg);
        auto fm = std::make_shared<envs::FeatureMap>(envs::make_feature_map(cfg, m, psi, streams.build));
        agents::BatchAgentOptions o;
        o.mode = mode;
        o.params.horizon = n;
        o.params.prior_var = prior_var;
        o.params.noise_var = noise_var;
        agents::BatchAgent agent(std::make_shared<agents::RowFeatureFamily>(fm), o);
        return run_live(agent, env, streams, seed, live);
    };
}

deep::EnsembleOptions deep_options(const ExperimentConfig& c, int horizon) {
    deep::EnsembleOptions o;
    o.hidden.clear();
    for (long h : c.get_ints("hidden")) o.hidden.push_back(int(h));
    o.gamma = c.get_double("gamma");
    o.learning_rate = c.get_double("learning_rate");
    o.optimizer = deep::parse_optimizer(c.get("optimizer"));
    o.mean_loss = c.get_bool("mean_loss");
    o.minibatch = std::size_t(c.get_int("minibatch"));
    const long steps = c.get_int("sgd_steps_per_learn");
    o.sgd_steps_per_learn = steps > 0 ? int(steps) : horizon;
    o.capacity = std::size_t(c.get_int("capacity"));
    o.prior_scale = c.get_double("prior_scale");
    o.update = deep::parse_ensemble_update(c.get("update"));
    o.noise_var = c.get_double("update_noise_var");
    require(o.sgd_steps_per_learn > 0, "sgd_steps_per_learn must be positive here");
    return o;
}

// ---- experiments -------------------------------------------------------

void plan_tabular_compare(const ExperimentConfig& c, Plan& plan) {
    const int n = int(c.get_int("size_n"));
    require(n >= 2, "size_n must be at least 2");
    const auto live = live_settings(c);
    const auto seeds = c.seeds();
    std::set<std::uint64_t> bombs;
    for (long b : c.get_ints("bomb_seeds")) bombs.insert(std::uint64_t(b));
    const double v = c.get_double("rlsvi_noise_var_over_h2") * n * n;
    const double lambda = c.get_double("rlsvi_prior_var_over_noise") * v;
    require(v > 0 && lambda > 0, "RLSVI variances must be positive");

    baselines::Ucrl2Params up;
    up.multiplier = c.get_double("ucrl2_multiplier");
    up.confidence_scale = c.get_double("ucrl2_confidence_scale");
    up.delta = c.get_double("ucrl2_delta");
    const double psrl_mult = c.get_double("psrl_multiplier");

    struct AgentSpec {
        std::string label;
        json params;
        std::function<std::unique_ptr<core::Agent>()> make;
    };
    std::vector<AgentSpec> specs;
    auto batch = [n, v, lambda](agents::LearnMode mode, agents::ActionRule rule, double eps, double eta) {
        return [=]() -> std::unique_ptr<core::Agent> {
            agents::BatchAgentOptions o;
            o.mode = mode;
            o.rule = rule;
            o.epsilon = eps;
            o.eta = eta;
            o.params.horizon = n;
            o.params.noise_var = v;
            o.params.prior_var = lambda;
            return std::make_unique<agents::BatchAgent>(std::make_shared<agents::TabularFamily>(n, n, 2), o);
        };
    };
    for (const auto& name : c.get_strings("agents")) {
        if (name == "rlsvi") {
            specs.push_back({"rlsvi", {{"agent", "rlsvi"}, {"v", v}, {"lambda", lambda}},
                             batch(agents::LearnMode::gaussian, agents::ActionRule::greedy, 0, 0)});
        } else if (name == "psrl") {
            specs.push_back({"psrl", {{"agent", "psrl"}, {"multiplier", psrl_mult}}, [=]() -> std::unique_ptr<core::Agent> {
                                 return std::make_unique<baselines::PsrlAgent>(n, n, 2, baselines::PosteriorPrior{},
                                                                               psrl_mult);
                             }});
        } else if (name == "ucrl2") {
            specs.push_back({"ucrl2",
                             {{"agent", "ucrl2"}, {"multiplier", up.multiplier}, {"confidence_scale", up.confidence_scale}},
                             [=]() -> std::unique_ptr<core::Agent> { return std::make_unique<baselines::Ucrl2Agent>(n, n, 2, up); }});
        } else if (name == "boltzmann") {
            for (double eta : c.get_doubles("boltzmann_etas"))
                specs.push_back({"boltzmann_eta" + label_number(eta), {{"agent", "boltzmann"}, {"eta", eta}},
                                 batch(agents::LearnMode::lsvi, agents::ActionRule::boltzmann, 0, eta)});
        } else if (name == "egreedy") {
            const double eps = c.get_double("epsilon");
            specs.push_back({"egreedy", {{"agent", "egreedy"}, {"epsilon", eps}},
                             batch(agents::LearnMode::lsvi, agents::ActionRule::epsilon_greedy, eps, 0)});
        } else {
            throw std::invalid_argument("unknown agent '" + name + "'");
        }
    }
    for (auto& spec : specs) {
        spec.params["budget"] = live.episodes;
        const int cell = plan.add_cell(spec.label, spec.params);
        for (auto seed : seeds) {
            const bool treasure = !bombs.count(seed);
            plan.add_run(cell, seed, [=, make = spec.make] {
                auto streams = core::RunStreams::from_root(seed);
                envs::DeepSea env(sea(n, treasure, seed));
                auto agent = make();
                return run_live(*agent, env, streams, seed, live);
            });
        }
    }
}

void plan_linear_scaling(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int m = int(c.get_int("features_per_row"));
    for (long n : c.get_ints("sizes")) {
        require(n >= 2, "sizes must be at least 2");
        const int cell = plan.add_cell("n" + std::to_string(n),
                                       {{"x", n}, {"series", "gaussian"}, {"budget", live.episodes}, {"size_n", n}});
        for (auto seed : c.seeds())
            plan.add_run(cell, seed,
                         linear_rlsvi_job(int(n), m, 0.0, agents::LearnMode::gaussian, c.get_double("prior_var"),
                                          c.get_double("noise_var"), 0.0, seed, live));
    }
}

void plan_feature_scaling(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int n = int(c.get_int("size_n"));
    for (long m : c.get_ints("features")) {
        require(m >= 1, "features must be positive");
        const int cell = plan.add_cell(
            "m" + std::to_string(m), {{"x", m}, {"x_label", "M"}, {"series", "gaussian"}, {"budget", live.episodes}, {"m", m}});
        for (auto seed : c.seeds())
            plan.add_run(cell, seed,
                         linear_rlsvi_job(n, int(m), 0.0, agents::LearnMode::gaussian, c.get_double("prior_var"),
                                          c.get_double("noise_var"), 0.0, seed, live));
    }
}

void plan_misspecification(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int n = int(c.get_int("size_n")), m = int(c.get_int("features_per_row"));
    for (double psi : c.get_doubles("psis")) {
        require(psi >= 0, "psi must be non-negative");
        const int cell = plan.add_cell("psi" + label_number(psi), {{"psi", psi}, {"budget", live.episodes}});
        for (auto seed : c.seeds())
            plan.add_run(cell, seed,
                         linear_rlsvi_job(n, m, psi, agents::LearnMode::gaussian, c.get_double("prior_var"),
                                          c.get_double("noise_var"), 0.0, seed, live));
    }
}

void plan_param_sweep(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int n = int(c.get_int("size_n")), m = int(c.get_int("features_per_row"));
    const double sd = c.get_double("reward_noise_sd");
    for (double lambda : c.get_doubles("prior_vars")) {
        require(lambda > 0, "prior_vars must be positive");
        for (double v : c.get_doubles("noise_vars")) {
            require(v > 0, "noise_vars must be positive");
            const int cell = plan.add_cell("lambda" + label_number(lambda) + "_v" + label_number(v),
                                           {{"lambda", lambda}, {"v", v}, {"mode", "gaussian"}, {"budget", live.episodes}});
            for (auto seed : c.seeds())
                plan.add_run(cell, seed, linear_rlsvi_job(n, m, 0.0, agents::LearnMode::gaussian, lambda, v, sd, seed, live));
        }
        if (c.get_bool("bootstrap")) {
            const int cell = plan.add_cell("lambda" + label_number(lambda) + "_bootstrap",
                                           {{"lambda", lambda}, {"v", c.get_double("bootstrap_noise_var")}, {"mode", "bootstrap"}, {"budget", live.episodes}});
            // v sets the ridge weight against the sampled prior; the data noise comes from resampling
            const double v = c.get_double("bootstrap_noise_var");
            for (auto seed : c.seeds())
                plan.add_run(cell, seed, linear_rlsvi_job(n, m, 0.0, agents::LearnMode::bootstrap, lambda, v, sd, seed, live));
        }
    }
}

void plan_bootstrap_vs_gaussian(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int m = int(c.get_int("features_per_row"));
    for (auto mode : {agents::LearnMode::gaussian, agents::LearnMode::bootstrap}) {
        const std::string name = mode == agents::LearnMode::gaussian ? "gaussian" : "bootstrap";
        for (long n : c.get_ints("sizes")) {
            const int cell = plan.add_cell(name + "_n" + std::to_string(n),
                                           {{"x", n}, {"series", name}, {"budget", live.episodes}, {"size_n", n}});
            for (auto seed : c.seeds())
                plan.add_run(cell, seed,
                             linear_rlsvi_job(int(n), m, 0.0, mode, c.get_double("prior_var"), c.get_double("noise_var"),
                                              0.0, seed, live));
        }
    }
}

std::function<SeedRun()> deep_sea_ensemble_job(int n, const std::string& representation, int m, deep::EnsembleOptions o,
                                               std::uint64_t seed, LiveSettings live) {
    return [=] {
        auto streams = core::RunStreams::from_root(seed);
        auto mode = representation == "always_right" ? envs::ObservationMode::always_right_pixel
                    : representation == "pixel"      ? envs::ObservationMode::pixel
                                                     : envs::ObservationMode::linear;
        const auto cfg = sea(n, true, seed, 0.0, mode);
        envs::DeepSea env(cfg);
        std::shared_ptr<deep::InputEncoder> enc;
        if (representation == "linear")
            enc = std::make_shared<deep::DeepSeaLinearEncoder>(
                std::make_shared<envs::FeatureMap>(envs::make_feature_map(cfg, m, 0.0, streams.build)));
        else
            enc = std::make_shared<deep::DeepSeaPixelEncoder>(n);
        deep::EnsembleRlsviAgent agent(enc, 2, o, seed);
        return run_live(agent, env, streams, seed, live);
    };
}

void plan_ensemble_size(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int n = int(c.get_int("size_n"));
    for (long k : c.get_ints("ensemble_sizes")) {
        require(k >= 1, "ensemble sizes must be positive");
        auto o = deep_options(c, n);
        o.ensemble_size = int(k);
        o.validate();
        const int cell = plan.add_cell("k" + std::to_string(k), {{"ensemble_size", k}, {"budget", live.episodes}});
        for (auto seed : c.seeds()) plan.add_run(cell, seed, deep_sea_ensemble_job(n, "pixel", 0, o, seed, live));
    }
}

void plan_representation_scaling(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int n = int(c.get_int("size_n")), m = int(c.get_int("features_per_row"));
    auto o = deep_options(c, n);
    o.ensemble_size = int(c.get_int("ensemble_size"));
    o.validate();
    for (const auto& rep : c.get_strings("representations")) {
        require(rep == "pixel" || rep == "linear" || rep == "always_right", "unknown representation '" + rep + "'");
        const int cell = plan.add_cell(rep, {{"representation", rep}, {"budget", live.episodes}});
        for (auto seed : c.seeds()) plan.add_run(cell, seed, deep_sea_ensemble_job(n, rep, m, o, seed, live));
    }
}

void plan_cartpole(const ExperimentConfig& c, Plan& plan) {
    auto live = live_settings(c);
    live.stop_at_learning_time = false;
    auto o = deep_options(c, 0);
    o.ensemble_size = int(c.get_int("ensemble_size"));
    o.validate();
    auto add = [&](const std::string& label, deep::EnsembleOptions opts) {
        const int cell = plan.add_cell(label, {{"ensemble_size", opts.ensemble_size},
                                               {"prior_net", opts.prior_net},
                                               {"update", deep::to_string(opts.update)}});
        for (auto seed : c.seeds())
            plan.add_run(cell, seed, [=] {
                auto streams = core::RunStreams::from_root(seed);
                envs::Cartpole env;
                deep::EnsembleRlsviAgent agent(std::make_shared<deep::CartpoleEncoder>(), 3, opts, seed);
                return run_live(agent, env, streams, seed, live);
            });
    };
    add("ensemble", o);
    if (c.get_bool("baseline")) {
        auto b = o;
        b.ensemble_size = 1;
        b.update = deep::EnsembleUpdate::none;
        b.prior_net = false;
        b.rule = deep::ExploreRule::epsilon_greedy;
        b.epsilon_start = b.epsilon_end = c.get_double("baseline_epsilon");
        b.validate();
        add("dqn_baseline", b);
    }
}

void plan_dirichlet_regret(const ExperimentConfig& c, Plan& plan) {
    const auto live = live_settings(c);
    const int H = int(c.get_int("horizon")), X = int(c.get_int("num_states")), A = int(c.get_int("num_actions"));
    const double beta = c.get_double("beta");
    require(H >= 1 && X >= 1 && A >= 1, "MDP dimensions must be positive");
    require(beta >= 2, "beta must be at least 2");
    agents::TabularRlsviParams p;
    p.noise_var = c.get_double("noise_var_over_h2") * H * H;
    p.prior_var = p.noise_var / c.get_double("noise_over_prior");
    p.prior_mean = c.get_double("prior_mean_over_h") * H;
    const std::vector<double> alpha(std::size_t(2 * X), beta / (2 * X));
    const int cell = plan.add_cell("rlsvi", {{"v", p.noise_var}, {"lambda", p.prior_var}, {"prior_mean", p.prior_mean},
                                             {"beta", beta}, {"budget", live.episodes}});
    for (auto seed : c.seeds())
        plan.add_run(cell, seed, [=] {
            auto streams = core::RunStreams::from_root(seed);
            envs::TabularEnv env(envs::sample_dirichlet_mdp(H, X, A, alpha, streams.build));
            agents::TabularRlsviAgent agent(H, X, A, p);
            return run_live(agent, env, streams, seed, live);
        });
}

// ---- assertions --------------------------------------------------------

void check(ResultSet& r, const std::string& name, bool passed, const std::string& detail) {
    r.assertions.push_back({name, passed, detail});
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

double mean_final_regret(const Cell& c) { return mean_of(final_cum_regrets(c)); }

int budget_of(const Cell& c) { return c.params.value("budget", 0); }

double median_lt(const Cell& c) {
    const auto t = censored_learning_times(c, budget_of(c));
    return t.empty() ? std::nan("") : median(t);
}

void record_medians(ResultSet& r) {
    for (const auto& c : r.cells) {
        const auto t = censored_learning_times(c, budget_of(c));
        if (t.empty()) continue;
        r.statistics["median_learning_time"][c.label] = median(t);
        r.statistics["mean_final_cum_regret"][c.label] = mean_final_regret(c);
    }
}

void assess_tabular_compare(const ExperimentConfig& c, ResultSet& r) {
    std::set<std::uint64_t> bombs;
    for (long b : c.get_ints("bomb_seeds")) bombs.insert(std::uint64_t(b));
    const int budget = int(c.get_int("episodes"));
    auto treasure_runs = [&](const Cell& cell) {
        std::vector<const SeedRun*> out;
        for (const auto& run : cell.runs)
            if (!bombs.count(run.seed)) out.push_back(&run);
        return out;
    };
    if (const Cell* rl = r.find("rlsvi")) {
        int learned = 0, total = 0;
        std::string times;
        for (const auto* run : treasure_runs(*rl)) {
            ++total;
            learned += run->ok && run->learning_time && *run->learning_time <= budget;
            times += (times.empty() ? "" : " ") + (run->learning_time ? std::to_string(*run->learning_time) : "-");
        }
        check(r, "rlsvi_learns_every_treasure_seed", total > 0 && learned == total,
              std::to_string(learned) + "/" + std::to_string(total) + " treasure seeds learned; times " + times);
    }
    // dithering: the Boltzmann temperature is tuned by final regret
    const Cell* best_boltzmann = nullptr;
    for (const auto& cell : r.cells)
        if (cell.params.value("agent", "") == "boltzmann" &&
            (!best_boltzmann || mean_final_regret(cell) < mean_final_regret(*best_boltzmann)))
            best_boltzmann = &cell;
    for (const Cell* cell : {best_boltzmann, r.find("egreedy")}) {
        if (!cell) continue;
        int failed = 0, total = 0;
        for (const auto* run : treasure_runs(*cell)) {
            ++total;
            failed += run->ok && !(run->learning_time && *run->learning_time <= budget);
        }
        const std::string name = cell->params["agent"].get<std::string>();
        check(r, name + "_fails_on_four_fifths_of_treasure_seeds", total > 0 && 5 * failed >= 4 * total,
              cell->label + ": " + std::to_string(failed) + "/" + std::to_string(total) + " treasure seeds without learning");
    }
    const Cell *ps = r.find("psrl"), *rl = r.find("rlsvi"), *uc = r.find("ucrl2");
    if (ps && rl && uc) {
        const double margin = c.get_double("ordering_margin");
        const double a = mean_final_regret(*ps), b = mean_final_regret(*rl), d = mean_final_regret(*uc);
        check(r, "regret_ordering_psrl_rlsvi_ucrl2", a <= (1 + margin) * b && b <= (1 + margin) * d,
              "final mean cumulative regret psrl " + fmt(a) + ", rlsvi " + fmt(b) + ", ucrl2 " + fmt(d));
    }
}

std::vector<std::pair<double, double>> median_points(const ResultSet& r, const std::string& series) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : r.cells)
        if (c.params.contains("x") && c.params.value("series", "") == series)
            pts.push_back({c.params["x"].get<double>(), median_lt(c)});
    return pts;
}

// slope over medians, with censored medians making the slope invalid
std::optional<double> slope_of(const ResultSet& r, const std::string& series, std::string& why) {
    for (const auto& c : r.cells)
        if (c.params.value("series", "") == series && median_lt(c) > budget_of(c)) {
            why = "median learning time of " + c.label + " is past the budget";
            return std::nullopt;
        }
    try {
        return loglog_slope(median_points(r, series));
    } catch (const std::exception& e) {
        why = e.what();
        return std::nullopt;
    }
}

void assess_linear_scaling(const ExperimentConfig& c, ResultSet& r) {
    int finite = 0, total = 0, below = 0;
    std::string worst;
    const double frac = c.get_double("max_time_over_dithering");
    for (const auto& cell : r.cells) {
        const int n = cell.params["size_n"].get<int>();
        for (const auto& run : cell.runs) {
            ++total;
            if (!run.ok || !run.learning_time) continue;
            ++finite;
            if (*run.learning_time < frac * std::pow(2.0, n))
                ++below;
            else if (worst.empty())
                worst = "; e.g. N=" + std::to_string(n) + " seed " + std::to_string(run.seed) + " took " +
                        std::to_string(*run.learning_time) + " >= " + fmt(frac * std::pow(2.0, n));
        }
    }
    check(r, "learning_times_finite", total > 0 && finite == total,
          std::to_string(finite) + "/" + std::to_string(total) + " runs reached their learning time");
    check(r, "learning_times_below_dithering_fraction", total > 0 && below == total,
          std::to_string(below) + "/" + std::to_string(total) + " runs below " + fmt(frac) + " * 2^N" + worst);
    std::string why;
    auto s = slope_of(r, "gaussian", why);
    if (s) r.statistics["loglog_slope"] = *s;
    const double lo = c.get_double("slope_min"), hi = c.get_double("slope_max");
    check(r, "loglog_slope_in_range", s && *s >= lo && *s <= hi,
          s ? "slope " + fmt(*s) + " (accepted [" + fmt(lo) + ", " + fmt(hi) + "])" : why);
}

void assess_feature_scaling(const ExperimentConfig&, ResultSet& r) {
    const Cell *a = r.find("m10"), *b = r.find("m40"), *d = r.find("m80");
    if (!a || !b || !d) {
        check(r, "feature_increase_diminishes", false, "needs cells M=10, 40 and 80");
        return;
    }
    const double m10 = median_lt(*a), m40 = median_lt(*b), m80 = median_lt(*d);
    check(r, "feature_increase_diminishes", (m80 - m40) < (m40 - m10),
          "median learning time M=10 " + fmt(m10) + ", M=40 " + fmt(m40) + ", M=80 " + fmt(m80));
}

void assess_misspecification(const ExperimentConfig& c, ResultSet& r) {
    const Cell *lo = nullptr, *hi = nullptr;
    for (const auto& cell : r.cells) {
        const double psi = cell.params["psi"].get<double>();
        if (psi == 0) lo = &cell;
        if (!hi || psi > hi->params["psi"].get<double>()) hi = &cell;
    }
    if (!lo || !hi || lo == hi) {
        check(r, "regret_ratio_across_psi", false, "needs a psi=0 cell and a larger psi");
        return;
    }
    const double ratio = mean_final_regret(*hi) / mean_final_regret(*lo);
    r.statistics["regret_ratio"] = ratio;
    check(r, "regret_ratio_across_psi", ratio <= c.get_double("max_ratio"),
          hi->label + " / " + lo->label + " mean cumulative regret " + fmt(mean_final_regret(*hi)) + " / " +
              fmt(mean_final_regret(*lo)) + " = " + fmt(ratio));
}

// V* - V(always left) on a treasure instance: the regret of never exploring
double always_left_gap(int n) {
    envs::DeepSea env(sea(n, true, 0));
    const auto& mdp = *env.planning_model();
    const auto& layout = env.layout();
    auto q = envs::value_iteration(mdp);
    std::vector<double> vstar(std::size_t(mdp.num_states));
    for (int x = 0; x < mdp.num_states; ++x) vstar[x] = q.value(0, x);
    auto left = [&](int t, int x, std::span<double> out) {
        const int right = layout.right_action({t, x});
        out[right] = 0.0;
        out[1 - right] = 1.0;
    };
    return envs::initial_value(mdp, vstar) - envs::initial_value(mdp, envs::policy_evaluation(mdp, left));
}

void assess_param_sweep(const ExperimentConfig& c, ResultSet& r) {
    const int n = int(c.get_int("size_n")), budget = int(c.get_int("episodes"));
    const double gap = always_left_gap(n);
    r.statistics["always_left_gap"] = gap;
    const double frac = c.get_double("linear_fraction"), boot_ratio = c.get_double("bootstrap_ratio");
    for (double lambda : c.get_doubles("prior_vars")) {
        const std::string pre = "lambda" + label_number(lambda);
        const auto vs = c.get_doubles("noise_vars");
        const double vmin = *std::min_element(vs.begin(), vs.end());
        // the cell closest to v = 1 on a log scale
        double vone = vs.front();
        for (double v : vs)
            if (std::abs(std::log(v)) < std::abs(std::log(vone))) vone = v;
        if (const Cell* small = r.find(pre + "_v" + label_number(vmin))) {
            int linear = 0, total = 0;
            for (const auto& run : small->runs) {
                if (!run.ok) continue;
                ++total;
                linear += run.trace.cumulative_regret().back() >= frac * budget * gap;
            }
            check(r, pre + "_small_v_has_linear_regret", total > 0 && 2 * linear >= total,
                  small->label + ": " + std::to_string(linear) + "/" + std::to_string(total) +
                      " seeds with cumulative regret >= " + fmt(frac * budget * gap));
        }
        if (const Cell* one = r.find(pre + "_v" + label_number(vone))) {
            int learned = 0, total = 0;
            for (const auto& run : one->runs) {
                if (!run.ok) continue;
                ++total;
                learned += run.learning_time.has_value();
            }
            check(r, pre + "_v_near_one_learns", total > 0 && 2 * learned >= total,
                  one->label + ": " + std::to_string(learned) + "/" + std::to_string(total) + " seeds reached learning time");
        }
        if (const Cell* boot = r.find(pre + "_bootstrap")) {
            double best = INFINITY;
            std::string best_label;
            for (double v : vs)
                if (const Cell* cell = r.find(pre + "_v" + label_number(v)))
                    if (mean_final_regret(*cell) < best) {
                        best = mean_final_regret(*cell);
                        best_label = cell->label;
                    }
            const double b = mean_final_regret(*boot);
            check(r, pre + "_bootstrap_competitive", b <= boot_ratio * best,
                  "bootstrap " + fmt(b) + " vs best " + best_label + " " + fmt(best));
        }
    }
}

void assess_bootstrap_vs_gaussian(const ExperimentConfig& c, ResultSet& r) {
    std::string why_g, why_b;
    auto g = slope_of(r, "gaussian", why_g), b = slope_of(r, "bootstrap", why_b);
    if (g) r.statistics["loglog_slope_gaussian"] = *g;
    if (b) r.statistics["loglog_slope_bootstrap"] = *b;
    const double tol = c.get_double("max_slope_difference");
    check(r, "bootstrap_scales_like_gaussian", g && b && std::abs(*g - *b) <= tol,
          g && b ? "slopes gaussian " + fmt(*g) + ", bootstrap " + fmt(*b) : (g ? why_b : why_g));
}

void assess_ensemble_size(const ExperimentConfig& c, ResultSet& r) {
    const auto ks = c.get_ints("ensemble_sizes");
    std::vector<double> regrets;
    std::string detail;
    for (long k : ks) {
        const Cell* cell = r.find("k" + std::to_string(k));
        regrets.push_back(cell ? mean_final_regret(*cell) : std::nan(""));
        detail += (detail.empty() ? "" : ", ") + ("K=" + std::to_string(k) + " " + fmt(regrets.back()));
    }
    bool decreasing = regrets.size() >= 2, plateau = regrets.size() >= 3;
    for (std::size_t i = 1; i < regrets.size(); ++i) {
        decreasing = decreasing && regrets[i] < regrets[i - 1];
        if (i + 1 < regrets.size()) plateau = plateau && (regrets[i] - regrets[i + 1]) < (regrets[i - 1] - regrets[i]);
    }
    check(r, "regret_decreases_with_k", decreasing, "final mean cumulative regret " + detail);
    check(r, "improvement_diminishes_with_k", plateau, "final mean cumulative regret " + detail);
}

void assess_representation_scaling(const ExperimentConfig& c, ResultSet& r) {
    const Cell *px = r.find("pixel"), *lin = r.find("linear"), *ar = r.find("always_right");
    if (px && lin) {
        const double a = median_lt(*lin), b = median_lt(*px);
        check(r, "linear_at_most_half_of_pixel", a <= 0.5 * b,
              "median learning time linear " + fmt(a) + ", pixel " + fmt(b) + " (budget+1 when unreached)");
    }
    if (ar) {
        const double a = median_lt(*ar);
        const double cap = double(c.get_int("always_right_max"));
        check(r, "always_right_is_fast", a <= cap, "median learning time " + fmt(a) + " (accepted <= " + fmt(cap) + ")");
    }
}

double tail_mean_return(const SeedRun& run, double fraction) {
    const std::size_t n = run.trace.size();
    const std::size_t tail = std::max<std::size_t>(1, std::size_t(std::ceil(fraction * double(n))));
    double s = 0;
    for (std::size_t i = n - tail; i < n; ++i) s += run.trace.per_episode_return[i];
    return s / double(tail);
}

void assess_cartpole(const ExperimentConfig& c, ResultSet& r) {
    const double frac = c.get_double("tail_fraction");
    if (const Cell* e = r.find("ensemble")) {
        int positive = 0;
        std::string detail;
        for (const auto& run : e->runs) {
            if (!run.ok) continue;
            const double m = tail_mean_return(run, frac);
            positive += m > 0;
            detail += (detail.empty() ? "" : " ") + fmt(m);
        }
        const int need = int(c.get_int("min_passing_seeds"));
        check(r, "ensemble_swings_up", positive >= need,
              std::to_string(positive) + " seeds with positive tail reward (need " + std::to_string(need) + "); " + detail);
    }
    if (const Cell* b = r.find("dqn_baseline")) {
        int nonpos = 0, total = 0;
        std::string detail;
        for (const auto& run : b->runs) {
            if (!run.ok) continue;
            ++total;
            const double m = tail_mean_return(run, frac);
            nonpos += m <= 0;
            detail += (detail.empty() ? "" : " ") + fmt(m);
        }
        check(r, "dithering_baseline_stays_motionless", total > 0 && nonpos == total,
              std::to_string(nonpos) + "/" + std::to_string(total) + " seeds with tail reward <= 0; " + detail);
    }
}

void assess_dirichlet_regret(const ExperimentConfig& c, ResultSet& r) {
    const Cell* cell = r.find("rlsvi");
    if (!cell) return;
    const auto agg = aggregate(*cell);
    const std::size_t L2 = agg.mean_cum_regret.size(), L = L2 / 2;
    double min_regret = INFINITY;
    for (const auto& run : cell->runs)
        for (double v : run.trace.per_episode_regret) min_regret = std::min(min_regret, v);
    r.statistics["min_episode_regret"] = min_regret;
    if (L == 0 || agg.seeds[L2 - 1] != int(cell->runs.size())) {
        check(r, "bayesian_regret_sublinear", false, "not every run reached the full budget");
    } else {
        const double ratio = agg.mean_cum_regret[L2 - 1] / agg.mean_cum_regret[L - 1];
        r.statistics["regret_ratio"] = ratio;
        check(r, "bayesian_regret_sublinear", agg.mean_cum_regret[L - 1] > 0 && ratio < c.get_double("max_ratio"),
              "Regret(" + std::to_string(L2) + ") / Regret(" + std::to_string(L) + ") = " +
                  fmt(agg.mean_cum_regret[L2 - 1]) + " / " + fmt(agg.mean_cum_regret[L - 1]) + " = " + fmt(ratio));
    }
    const double floor = c.get_double("min_episode_regret");
    check(r, "episode_regret_non_negative", std::isfinite(min_regret) && min_regret >= floor,
          "smallest per-episode regret " + fmt(min_regret));
}

void run_jobs(Plan& plan, int workers, const RunHooks& hooks) {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.jobs.size()) return;
            const auto& job = plan.jobs[i];
            const auto t0 = std::chrono::steady_clock::now();
            SeedRun out;
            try {
                if (hooks.before_run) hooks.before_run(plan.result.cells[job.cell].label, job.seed);
                out = job.run();
            } catch (const std::exception& e) {
                out = SeedRun{};
                out.ok = false;
                out.error = e.what();
            }
            out.seed = job.seed;
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::lock_guard lock(mu);
            auto& cell = plan.result.cells[job.cell];
            if (hooks.progress) {
                std::ostringstream os;
                os << cell.label << " seed " << job.seed << ": ";
                if (!out.ok)
                    os << "FAILED " << out.error;
                else
                    os << out.trace.size() << " episodes, learning time "
                       << (out.learning_time ? std::to_string(*out.learning_time) : std::string("-"));
                os << " (" << fmt(secs) << " s)";
                hooks.progress(os.str());
            }
            cell.runs[job.slot] = std::move(out);
        }
    };
    if (workers <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
}

}  // namespace

int worker_count(const ExperimentConfig& config) {
    if (config.get_bool("deterministic")) return 1;
    return std::max(1, int(config.get_int("workers")));
}

std::filesystem::path output_dir(const ExperimentConfig& config) {
    if (const char* env = std::getenv("RVE_OUT"); env && *env) return env;
    return config.get("out");
}

ResultSet run_experiment(const ExperimentConfig& config, const RunHooks& hooks) {
    Plan plan;
    plan.result.experiment = to_string(config.id());
    plan.result.config = config.to_json();
    require(config.get_int("workers") >= 1, "workers must be positive");
    const auto seeds = config.seeds();
    require(!seeds.empty(), "seed list is empty");
    require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), "seed list has duplicates");

    using Fn = void (*)(const ExperimentConfig&, Plan&);
    using Check = void (*)(const ExperimentConfig&, ResultSet&);
    Fn planner = nullptr;
    Check assess = nullptr;
    switch (config.id()) {
        case ExperimentId::tabular_compare: planner = plan_tabular_compare; assess = assess_tabular_compare; break;
        case ExperimentId::linear_scaling: planner = plan_linear_scaling; assess = assess_linear_scaling; break;
        case ExperimentId::feature_scaling: planner = plan_feature_scaling; assess = assess_feature_scaling; break;
        case ExperimentId::misspecification: planner = plan_misspecification; assess = assess_misspecification; break;
        case ExperimentId::param_sweep: planner = plan_param_sweep; assess = assess_param_sweep; break;
        case ExperimentId::bootstrap_vs_gaussian: planner = plan_bootstrap_vs_gaussian; assess = assess_bootstrap_vs_gaussian; break;
        case ExperimentId::ensemble_size: planner = plan_ensemble_size; assess = assess_ensemble_size; break;
        case ExperimentId::representation_scaling: planner = plan_representation_scaling; assess = assess_representation_scaling; break;
        case ExperimentId::cartpole: planner = plan_cartpole; assess = assess_cartpole; break;
        case ExperimentId::dirichlet_regret: planner = plan_dirichlet_regret; assess = assess_dirichlet_regret; break;
        case ExperimentId::theory_suite: {
            auto suite = theory::run_theory_suite(seeds.front());
            auto& r = plan.result;
            check(r, "planning_bellman_gap", suite.planning_gap, "gap below 1e-9 on every random MDP");
            check(r, "gaussian_order_iff_condition", suite.gaussian_order, "verdicts agree with the closed form");
            check(r, "gaussian_dirichlet_dominance", suite.gaussian_dirichlet, "dominance on every random case");
            check(r, "visit_sum_bounds", suite.visit_sums, "both sums bounded on every stream");
            check(r, "gaussian_maximal_inequality", suite.gaussian_max, "bound holds for every n");
            r.statistics["theory_report"] = suite.report;
            r.extra_files.push_back({"theory_report.json", suite.report.dump(2) + "\n"});
            return plan.result;
        }
    }
    planner(config, plan);
    run_jobs(plan, worker_count(config), hooks);
    for (const auto& cell : plan.result.cells)
        for (const auto& run : cell.runs)
            if (!run.ok) plan.result.partial = true;
    record_medians(plan.result);
    assess(config, plan.result);
    if (plan.result.partial) check(plan.result, "all_runs_completed", false, "some seed runs failed; aggregates are partial");
    return plan.result;
}

}  // namespace rve::harness
