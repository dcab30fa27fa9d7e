#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "rve/core/types.hpp"
#include "rve/deep/mlp.hpp"
#include "rve/envs/feature_map.hpp"

namespace rve::deep {

using SparseEntries = std::vector<std::pair<int, double>>;

// Maps a state handle to a network input.
class InputEncoder {
public:
    virtual ~InputEncoder() = default;
    virtual int input_dim() const = 0;
    virtual void encode(const core::State& s, SparseEntries& out) const = 0;
    // true when the input depends only on State::key(), so it can be cached
    virtual bool finite_states() const { return true; }
};

// N x N grid with a single 1 at the diver's cell.
class DeepSeaPixelEncoder final : public InputEncoder {
public:
    explicit DeepSeaPixelEncoder(int n) : n_(n) {}
    int input_dim() const override { return n_ * n_; }
    void encode(const core::State& s, SparseEntries& out) const override;

private:
    int n_;
};

// phi(s, a) for both actions side by side: entries [a * D + row * M + k].
class DeepSeaLinearEncoder final : public InputEncoder {
public:
    explicit DeepSeaLinearEncoder(std::shared_ptr<const envs::FeatureMap> fm) : fm_(std::move(fm)) {}
    int input_dim() const override { return 2 * fm_->dim(); }
    void encode(const core::State& s, SparseEntries& out) const override;

private:
    std::shared_ptr<const envs::FeatureMap> fm_;
};

// Raw physical state (theta wrapped, theta_dot, x, x_dot).
class CartpoleEncoder final : public InputEncoder {
public:
    int input_dim() const override { return 4; }
    void encode(const core::State& s, SparseEntries& out) const override;
    bool finite_states() const override { return false; }
};

InputBatch make_batch(int input_dim, const std::vector<const SparseEntries*>& columns);
Eigen::VectorXd forward_sparse(const MlpParams& p, const SparseEntries& x);

}  // namespace rve::deep
