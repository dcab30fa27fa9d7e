#include "rve/envs/tabular_mdp.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rve::envs {

void TabularMdp::validate(double tol) const {
    if (horizon < 0 || num_states < 1 || num_actions < 1) throw std::invalid_argument("bad tabular MDP shape");
    if (outcome_probs.size() != std::size_t(horizon) * num_states * num_actions * num_outcomes())
        throw std::invalid_argument("outcome table has wrong size");
    if (initial.size() != std::size_t(num_states)) throw std::invalid_argument("initial distribution has wrong size");
    auto check = [&](const double* p, int n) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(p[i] >= 0.0)) throw std::invalid_argument("negative or non-finite probability");
            s += p[i];
        }
        if (std::abs(s - 1.0) > tol) throw std::invalid_argument("distribution does not sum to 1");
    };
    check(initial.data(), num_states);
    for (std::size_t i = 0; i < outcome_probs.size(); i += num_outcomes()) check(outcome_probs.data() + i, num_outcomes());
}

FiniteMdp TabularMdp::to_finite() const {
    FiniteMdp m(horizon, num_states, num_actions);
    m.initial = initial;
    const int X = num_states;
    for (int t = 0; t < horizon; ++t)
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < num_actions; ++a) {
                const double* o = outcomes(t, x, a);
                double* p = m.p(t, x, a);
                double r = 0.0;
                for (int y = 0; y < X; ++y) {
                    p[y] = o[y] + o[X + y];
                    r += o[X + y];
                }
                m.r(t, x, a) = r;
            }
    return m;
}

nlohmann::json TabularMdp::to_json() const {
    return nlohmann::json{{"format", "rve.tabular_mdp"}, {"version", 1},         {"horizon", horizon},
                          {"num_states", num_states},    {"num_actions", num_actions}, {"initial", initial},
                          {"outcome_probs", outcome_probs}};
}

TabularMdp TabularMdp::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "rve.tabular_mdp") throw std::invalid_argument("not a tabular MDP document");
    if (j.at("version").get<int>() != 1) throw std::invalid_argument("unsupported tabular MDP version");
    TabularMdp m;
    m.horizon = j.at("horizon").get<int>();
    m.num_states = j.at("num_states").get<int>();
    m.num_actions = j.at("num_actions").get<int>();
    m.initial = j.at("initial").get<std::vector<double>>();
    m.outcome_probs = j.at("outcome_probs").get<std::vector<double>>();
    m.validate(1e-9);
    return m;
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, core::Rng& rng) {
    std::vector<double> g(alpha.size(), 0.0);
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0.0) throw std::invalid_argument("negative Dirichlet parameter");
        if (alpha[i] == 0.0) continue;
        std::gamma_distribution<double> gd(alpha[i], 1.0);
        g[i] = gd(rng);
        s += g[i];
    }
    if (!(s > 0.0)) {
        // every gamma draw underflowed: fall back to the mean
        double tot = std::accumulate(alpha.begin(), alpha.end(), 0.0);
        if (!(tot > 0.0)) throw std::invalid_argument("Dirichlet parameters are all zero");
        for (std::size_t i = 0; i < alpha.size(); ++i) g[i] = alpha[i] / tot;
        return g;
    }
    for (double& v : g) v /= s;
    return g;
}

TabularMdp sample_dirichlet_mdp(int horizon, int num_states, int num_actions, std::span<const double> alpha0,
                                core::Rng& rng) {
    if (horizon < 1 || num_states < 1 || num_actions < 1) throw std::invalid_argument("bad tabular MDP shape");
    const std::size_t O = 2 * std::size_t(num_states);
    const std::size_t cells = std::size_t(horizon) * num_states * num_actions;
    bool shared = alpha0.size() == O;
    if (!shared && alpha0.size() != cells * O) throw std::invalid_argument("alpha0 has wrong length");
    for (std::size_t c = 0; c < (shared ? 1 : cells); ++c) {
        double beta = std::accumulate(alpha0.begin() + c * O, alpha0.begin() + (c + 1) * O, 0.0);
        if (beta < 2.0 - 1e-9) throw std::invalid_argument("Dirichlet pseudocount must be at least 2");
    }
    TabularMdp m;
    m.horizon = horizon;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.initial.assign(num_states, 1.0 / num_states);
    m.outcome_probs.resize(cells * O);
    for (std::size_t c = 0; c < cells; ++c) {
        auto a = shared ? alpha0 : alpha0.subspan(c * O, O);
        auto p = sample_dirichlet(a, rng);
        std::copy(p.begin(), p.end(), m.outcome_probs.begin() + c * O);
    }
    return m;
}

TabularEnv::TabularEnv(TabularMdp mdp) : mdp_(std::move(mdp)), finite_(mdp_.to_finite()) { mdp_.validate(1e-9); }

core::State TabularEnv::reset(core::Rng& rng) {
    double u = core::uniform01(rng), acc = 0.0;
    x_ = mdp_.num_states - 1;
    for (int x = 0; x < mdp_.num_states; ++x) {
        acc += mdp_.initial[x];
        if (u < acc) {
            x_ = x;
            break;
        }
    }
    t_ = 0;
    done_ = false;
    return core::State{0, x_, {}};
}

core::StepResult TabularEnv::step(int action, core::Rng& rng) {
    if (done_) throw std::logic_error("step called on a finished episode");
    if (action < 0 || action >= mdp_.num_actions) throw std::out_of_range("action index out of range");
    const double* o = mdp_.outcomes(t_, x_, action);
    const int O = mdp_.num_outcomes();
    double u = core::uniform01(rng), acc = 0.0;
    int pick = O - 1;
    for (int i = 0; i < O; ++i) {
        acc += o[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    while (o[pick] == 0.0 && pick > 0) --pick;  // rounding guard
    core::StepResult r;
    r.reward = pick >= mdp_.num_states ? 1.0 : 0.0;
    int next = pick % mdp_.num_states;
    if (t_ + 1 < mdp_.horizon) {
        ++t_;
        x_ = next;
        r.next = core::State{t_, x_, {}};
    } else {
        done_ = true;
    }
    return r;
}

}  // namespace rve::envs
