#include "rve/envs/planning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rve/core/action.hpp"

namespace rve::envs {

FiniteMdp::FiniteMdp(int h, int x, int a)
    : horizon(h),
      num_states(x),
      num_actions(a),
      reward(std::size_t(h) * x * a, 0.0),
      transition(std::size_t(h) * x * a * x, 0.0),
      initial(x, 0.0) {}

void FiniteMdp::validate(double tol) const {
    auto check = [&](const double* row, int n, const char* what) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            if (row[i] < -tol || !std::isfinite(row[i])) throw std::runtime_error(std::string("negative mass in ") + what);
            s += row[i];
        }
        if (std::abs(s - 1.0) > tol) throw std::runtime_error(std::string(what) + " does not sum to 1");
    };
    check(initial.data(), num_states, "initial distribution");
    for (int t = 0; t + 1 < horizon; ++t)
        for (int x = 0; x < num_states; ++x)
            for (int a = 0; a < num_actions; ++a) check(p(t, x, a), num_states, "transition row");
}

double QTable::value(int t, int x) const {
    if (t >= horizon) return 0.0;
    auto r = row(t, x);
    return *std::max_element(r.begin(), r.end());
}

QTable value_iteration(const FiniteMdp& mdp) { return value_iteration(mdp, mdp.horizon); }

QTable value_iteration(const FiniteMdp& mdp, int horizon) {
    if (horizon < 0 || horizon > mdp.horizon) throw std::invalid_argument("planning horizon out of range");
    const int H = mdp.horizon, X = mdp.num_states, A = mdp.num_actions;
    QTable q(H, X, A);
    std::vector<double> v_next(X, 0.0);
    for (int t = H - 1; t >= H - horizon; --t) {
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                double acc = mdp.r(t, x, a);
                if (t + 1 < H) {
                    const double* p = mdp.p(t, x, a);
                    for (int y = 0; y < X; ++y) acc += p[y] * v_next[y];
                }
                q.at(t, x, a) = acc;
            }
        for (int x = 0; x < X; ++x) v_next[x] = q.value(t, x);
    }
    return q;
}

std::vector<double> policy_evaluation(const FiniteMdp& mdp, const PolicyFn& policy) {
    const int H = mdp.horizon, X = mdp.num_states, A = mdp.num_actions;
    std::vector<double> v(std::size_t(H) * X, 0.0);
    std::vector<double> probs(A);
    for (int t = H - 1; t >= 0; --t) {
        for (int x = 0; x < X; ++x) {
            policy(t, x, probs);
            double acc = 0.0;
            for (int a = 0; a < A; ++a) {
                if (probs[a] == 0.0) continue;
                double qa = mdp.r(t, x, a);
                if (t + 1 < H) {
                    const double* p = mdp.p(t, x, a);
                    const double* vn = v.data() + std::size_t(t + 1) * X;
                    for (int y = 0; y < X; ++y) qa += p[y] * vn[y];
                }
                acc += probs[a] * qa;
            }
            v[std::size_t(t) * X + x] = acc;
        }
    }
    return v;
}

PolicyFn greedy_policy(const QTable& q) {
    return [&q](int t, int x, std::span<double> out) { core::greedy_distribution(q.row(t, x), out); };
}

double initial_value(const FiniteMdp& mdp, std::span<const double> v_table) {
    double s = 0.0;
    for (int x = 0; x < mdp.num_states; ++x) s += mdp.initial[x] * v_table[x];
    return s;
}

}  // namespace rve::envs
