#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rve/core/rng.hpp"
#include "rve/envs/deep_sea.hpp"

namespace rve::envs {

// Row-block linear basis over deep-sea state-action pairs. Feature d of row
// r is nonzero only on the 2N pairs (r, col, a). Storage is [row][col][a][m].
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(int n, int m_per_row, double psi, std::vector<double> phi, std::vector<double> eta);

    int size_n() const { return n_; }
    int m_per_row() const { return m_; }
    int dim() const { return n_ * m_; }
    double psi() const { return psi_; }

    // phi + eta at (row, col, a): M contiguous values
    const double* features(int row, int col, int a) const { return effective_.data() + offset(row, col, a); }
    const double* clean(int row, int col, int a) const { return phi_.data() + offset(row, col, a); }
    const double* noise(int row, int col, int a) const { return eta_.data() + offset(row, col, a); }

    // basis vector d as a 2N vector over row pairs ordered (col, a)
    Eigen::VectorXd row_vector(int row, int m, bool with_noise = true) const;

private:
    std::size_t offset(int row, int col, int a) const { return ((std::size_t(row) * n_ + col) * 2 + a) * m_; }

    int n_ = 0;
    int m_ = 0;
    double psi_ = 0.0;
    std::vector<double> phi_, eta_, effective_;
};

// Q* of a deep-sea instance as a 2N vector per row, ordered (col, a).
Eigen::VectorXd deep_sea_qstar_row(const QTable& q, int row);

FeatureMap make_feature_map(const DeepSeaConfig& cfg, int m_per_row, double psi, core::Rng& rng);

}  // namespace rve::envs
