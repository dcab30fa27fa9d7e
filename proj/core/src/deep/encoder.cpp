#include "rve/deep/encoder.hpp"

#include <stdexcept>

#include "rve/envs/cartpole.hpp"

namespace rve::deep {

void DeepSeaPixelEncoder::encode(const core::State& s, SparseEntries& out) const {
    if (s.t < 0 || s.t >= n_ || s.x < 0 || s.x >= n_) throw std::out_of_range("state outside the grid");
    out.assign(1, {s.t * n_ + s.x, 1.0});
}

void DeepSeaLinearEncoder::encode(const core::State& s, SparseEntries& out) const {
    const int n = fm_->size_n(), m = fm_->m_per_row(), d = fm_->dim();
    if (s.t < 0 || s.t >= n || s.x < 0 || s.x >= n) throw std::out_of_range("state outside the grid");
    out.clear();
    for (int a = 0; a < 2; ++a) {
        const double* f = fm_->features(s.t, s.x, a);
        for (int k = 0; k < m; ++k)
            if (f[k] != 0.0) out.emplace_back(a * d + s.t * m + k, f[k]);
    }
}

void CartpoleEncoder::encode(const core::State& s, SparseEntries& out) const {
    out.clear();
    const double v[4] = {envs::wrap_angle(s.values[0]), s.values[1], s.values[2], s.values[3]};
    for (int i = 0; i < 4; ++i)
        if (v[i] != 0.0) out.emplace_back(i, v[i]);
}

InputBatch make_batch(int input_dim, const std::vector<const SparseEntries*>& columns) {
    InputBatch b(input_dim, Eigen::Index(columns.size()));
    std::size_t nnz = 0;
    for (const auto* c : columns) nnz += c->size();
    b.reserve(Eigen::Index(nnz));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        b.startVec(Eigen::Index(j));
        // entries are produced in increasing index order by every encoder
        for (const auto& [i, v] : *columns[j]) b.insertBack(i, Eigen::Index(j)) = v;
    }
    b.finalize();
    return b;
}

Eigen::VectorXd forward_sparse(const MlpParams& p, const SparseEntries& x) {
    const int L = p.shape.num_layers();
    Eigen::VectorXd z = p.biases[0];
    for (const auto& [i, v] : x) {
        if (i < 0 || i >= p.shape.input_dim) throw std::invalid_argument("input index out of range");
        z.noalias() += v * p.weights[0].col(i);
    }
    for (int l = 1; l < L; ++l) {
        Eigen::VectorXd h = z.cwiseMax(0.0);
        z = p.biases[l];
        z.noalias() += p.weights[l] * h;
    }
    return z;
}

}  // namespace rve::deep
