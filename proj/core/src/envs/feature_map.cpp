#include "rve/envs/feature_map.hpp"

#include <cmath>
#include <stdexcept>

namespace rve::envs {

FeatureMap::FeatureMap(int n, int m_per_row, double psi, std::vector<double> phi, std::vector<double> eta)
    : n_(n), m_(m_per_row), psi_(psi), phi_(std::move(phi)), eta_(std::move(eta)) {
    if (phi_.size() != std::size_t(n) * n * 2 * m_per_row || eta_.size() != phi_.size())
        throw std::invalid_argument("feature storage has wrong size");
    effective_.resize(phi_.size());
    for (std::size_t i = 0; i < phi_.size(); ++i) effective_[i] = phi_[i] + eta_[i];
}

Eigen::VectorXd FeatureMap::row_vector(int row, int m, bool with_noise) const {
    Eigen::VectorXd v(2 * n_);
    for (int c = 0; c < n_; ++c)
        for (int a = 0; a < 2; ++a) v[2 * c + a] = (with_noise ? features(row, c, a) : clean(row, c, a))[m];
    return v;
}

Eigen::VectorXd deep_sea_qstar_row(const QTable& q, int row) {
    Eigen::VectorXd v(2 * q.num_states);
    for (int c = 0; c < q.num_states; ++c)
        for (int a = 0; a < 2; ++a) v[2 * c + a] = q.at(row, c, a);
    return v;
}

FeatureMap make_feature_map(const DeepSeaConfig& cfg, int m_per_row, double psi, core::Rng& rng) {
    if (m_per_row < 1) throw std::invalid_argument("need at least one feature per row");
    if (psi < 0.0) throw std::invalid_argument("misspecification scale must be non-negative");
    const int n = cfg.size_n, len = 2 * n, M = m_per_row;
    DeepSeaConfig own = cfg, other = cfg;
    other.has_treasure = !cfg.has_treasure;
    QTable q_own = value_iteration(deep_sea_model(DeepSeaLayout(own)));
    QTable q_other = value_iteration(deep_sea_model(DeepSeaLayout(other)));
    const int rank = std::min(M, len);
    const double sd = std::sqrt(psi);

    std::vector<double> phi(std::size_t(n) * len * M), eta(phi.size(), 0.0);
    for (int row = 0; row < n; ++row) {
        // Spanning candidates: this instance's Q* row, the other instance's,
        // then Gaussian directions. Gram-Schmidt keeps the first `rank`
        // independent ones, so any rank >= 2 spans both optima.
        Eigen::MatrixXd basis(len, rank);
        int k = 0;
        auto offer = [&](Eigen::VectorXd v) {
            if (k >= rank) return;
            double norm0 = v.norm();
            if (norm0 == 0.0) return;
            for (int pass = 0; pass < 2; ++pass)
                for (int j = 0; j < k; ++j) v -= basis.col(j).dot(v) * basis.col(j);
            double nv = v.norm();
            if (nv <= 1e-10 * norm0) return;
            basis.col(k++) = v / nv;
        };
        offer(deep_sea_qstar_row(q_own, row));
        offer(deep_sea_qstar_row(q_other, row));
        while (k < rank) {
            Eigen::VectorXd g(len);
            for (int i = 0; i < len; ++i) g[i] = core::std_normal(rng);
            offer(g);
        }
        Eigen::MatrixXd mix(rank, M);
        for (int i = 0; i < rank; ++i)
            for (int j = 0; j < M; ++j) mix(i, j) = core::std_normal(rng);
        Eigen::MatrixXd feats = basis * mix;
        for (int j = 0; j < M; ++j) {
            double nj = feats.col(j).norm();
            if (nj == 0.0) throw std::runtime_error("degenerate random feature");
            feats.col(j) /= nj;
        }
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < 2; ++a)
                for (int j = 0; j < M; ++j) {
                    std::size_t off = ((std::size_t(row) * n + c) * 2 + a) * M + j;
                    phi[off] = feats(2 * c + a, j);
                    if (psi > 0.0) eta[off] = sd * core::std_normal(rng);
                }
    }
    return FeatureMap(n, M, psi, std::move(phi), std::move(eta));
}

}  // namespace rve::envs
