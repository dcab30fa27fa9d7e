#include "rve/core/action.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rve::core {

namespace {

void check_row(std::span<const double> q) {
    if (q.empty()) throw std::invalid_argument("empty action-value row");
    for (double v : q)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite action value");
}

}  // namespace

int greedy_action(std::span<const double> q, Rng& rng) {
    check_row(q);
    double best = q[0];
    int count = 1;
    int pick = 0;
    // single pass reservoir over the argmax set
    for (std::size_t a = 1; a < q.size(); ++a) {
        if (q[a] > best) {
            best = q[a];
            count = 1;
            pick = static_cast<int>(a);
        } else if (q[a] == best) {
            ++count;
            if (uniform_index(rng, count) == 0) pick = static_cast<int>(a);
        }
    }
    return pick;
}

int epsilon_greedy_action(std::span<const double> q, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon outside [0,1]");
    check_row(q);
    if (epsilon > 0.0 && uniform01(rng) < epsilon) return static_cast<int>(uniform_index(rng, q.size()));
    return greedy_action(q, rng);
}

int boltzmann_action(std::span<const double> q, double eta, Rng& rng) {
    if (!(eta > 0.0)) throw std::invalid_argument("temperature must be positive");
    check_row(q);
    double p[64];
    std::vector<double> heap;
    double* w = p;
    if (q.size() > 64) {
        heap.resize(q.size());
        w = heap.data();
    }
    boltzmann_distribution(q, eta, std::span<double>(w, q.size()));
    double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        acc += w[a];
        if (u < acc) return static_cast<int>(a);
    }
    // rounding left u above the total; last action with positive mass
    for (std::size_t a = q.size(); a-- > 0;)
        if (w[a] > 0.0) return static_cast<int>(a);
    return 0;
}

void greedy_distribution(std::span<const double> q, std::span<double> out) {
    check_row(q);
    double best = *std::max_element(q.begin(), q.end());
    int count = 0;
    for (double v : q) count += (v == best);
    for (std::size_t a = 0; a < q.size(); ++a) out[a] = (q[a] == best) ? 1.0 / count : 0.0;
}

void epsilon_greedy_distribution(std::span<const double> q, double epsilon, std::span<double> out) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon outside [0,1]");
    greedy_distribution(q, out);
    double u = epsilon / static_cast<double>(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) out[a] = (1.0 - epsilon) * out[a] + u;
}

void boltzmann_distribution(std::span<const double> q, double eta, std::span<double> out) {
    if (!(eta > 0.0)) throw std::invalid_argument("temperature must be positive");
    check_row(q);
    double m = *std::max_element(q.begin(), q.end());
    double z = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
        out[a] = std::exp((q[a] - m) / eta);
        z += out[a];
    }
    for (std::size_t a = 0; a < q.size(); ++a) out[a] /= z;
}

}  // namespace rve::core
