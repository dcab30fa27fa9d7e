#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "rve/core/types.hpp"
#include "rve/envs/feature_map.hpp"

namespace rve::agents {

// phi(s, a) is nonzero on a single block of the parameter vector.
struct FeatureRef {
    int block = 0;
    const double* data = nullptr;
    int dim = 0;
};

// Q_theta(s, a) = theta^T phi(s, a) with block-structured features. Blocks
// may carry a layer (the within-episode period they describe); when every
// transition moves from layer l to layer l+1, LSVI can be solved by one
// backward sweep instead of H full iterations.
class LinearValueFamily {
public:
    virtual ~LinearValueFamily() = default;
    virtual int num_actions() const = 0;
    virtual int num_blocks() const = 0;
    virtual int block_dim(int b) const = 0;
    virtual int block_offset(int b) const = 0;
    virtual int dim() const = 0;
    virtual FeatureRef features(const core::State& s, int a) const = 0;
    virtual int num_layers() const { return 0; }
    virtual int block_layer(int) const { return -1; }

    double q(const Eigen::VectorXd& theta, const core::State& s, int a) const;
    void q_row(const Eigen::VectorXd& theta, const core::State& s, std::span<double> out) const;
    double max_q(const Eigen::VectorXd& theta, const core::State& s) const;
};

// One indicator feature per (t, x, a).
class TabularFamily final : public LinearValueFamily {
public:
    TabularFamily(int horizon, int num_states, int num_actions);
    int num_actions() const override { return A_; }
    int num_blocks() const override { return H_ * X_ * A_; }
    int block_dim(int) const override { return 1; }
    int block_offset(int b) const override { return b; }
    int dim() const override { return H_ * X_ * A_; }
    FeatureRef features(const core::State& s, int a) const override;
    int num_layers() const override { return H_; }
    int block_layer(int b) const override { return b / (X_ * A_); }

private:
    int H_, X_, A_;
};

// Deep-sea row-block basis: one block of M features per row.
class RowFeatureFamily final : public LinearValueFamily {
public:
    explicit RowFeatureFamily(std::shared_ptr<const envs::FeatureMap> fm);
    int num_actions() const override { return 2; }
    int num_blocks() const override { return fm_->size_n(); }
    int block_dim(int) const override { return fm_->m_per_row(); }
    int block_offset(int b) const override { return b * fm_->m_per_row(); }
    int dim() const override { return fm_->dim(); }
    FeatureRef features(const core::State& s, int a) const override;
    int num_layers() const override { return fm_->size_n(); }
    int block_layer(int b) const override { return b; }

    const envs::FeatureMap& feature_map() const { return *fm_; }

private:
    std::shared_ptr<const envs::FeatureMap> fm_;
};

}  // namespace rve::agents
