#include "rve/agents/linear_family.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rve::agents {

namespace {
const double kOne = 1.0;
}

double LinearValueFamily::q(const Eigen::VectorXd& theta, const core::State& s, int a) const {
    auto f = features(s, a);
    const double* w = theta.data() + block_offset(f.block);
    double acc = 0.0;
    for (int i = 0; i < f.dim; ++i) acc += w[i] * f.data[i];
    return acc;
}

void LinearValueFamily::q_row(const Eigen::VectorXd& theta, const core::State& s, std::span<double> out) const {
    for (int a = 0; a < num_actions(); ++a) out[a] = q(theta, s, a);
}

double LinearValueFamily::max_q(const Eigen::VectorXd& theta, const core::State& s) const {
    double m = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions(); ++a) m = std::max(m, q(theta, s, a));
    return m;
}

TabularFamily::TabularFamily(int horizon, int num_states, int num_actions)
    : H_(horizon), X_(num_states), A_(num_actions) {
    if (H_ < 1 || X_ < 1 || A_ < 1) throw std::invalid_argument("bad tabular family shape");
}

FeatureRef TabularFamily::features(const core::State& s, int a) const {
    if (s.t < 0 || s.t >= H_ || s.x < 0 || s.x >= X_ || a < 0 || a >= A_)
        throw std::out_of_range("state-action outside the tabular family");
    return FeatureRef{(s.t * X_ + s.x) * A_ + a, &kOne, 1};
}

RowFeatureFamily::RowFeatureFamily(std::shared_ptr<const envs::FeatureMap> fm) : fm_(std::move(fm)) {
    if (!fm_) throw std::invalid_argument("null feature map");
}

FeatureRef RowFeatureFamily::features(const core::State& s, int a) const {
    const int n = fm_->size_n();
    if (s.t < 0 || s.t >= n || s.x < 0 || s.x >= n || a < 0 || a > 1)
        throw std::out_of_range("state-action outside the feature map");
    return FeatureRef{s.t, fm_->features(s.t, s.x, a), fm_->m_per_row()};
}

}  // namespace rve::agents
