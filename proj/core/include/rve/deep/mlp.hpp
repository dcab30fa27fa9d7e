#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <vector>

#include "rve/core/rng.hpp"

namespace rve::deep {

// input -> hidden ReLU layers -> linear head with one output per action
struct MlpShape {
    int input_dim = 1;
    std::vector<int> hidden;
    int num_outputs = 1;

    int num_layers() const { return int(hidden.size()) + 1; }
    int layer_in(int l) const { return l == 0 ? input_dim : hidden[l - 1]; }
    int layer_out(int l) const { return l + 1 == num_layers() ? num_outputs : hidden[l]; }
    std::size_t num_params() const;
    void validate() const;
    bool operator==(const MlpShape&) const = default;
};

struct MlpParams {
    MlpShape shape;
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is out x in
    std::vector<Eigen::VectorXd> biases;

    static MlpParams zeros(const MlpShape& shape);
    bool finite() const;
    std::uint64_t checksum() const;  // FNV-1a over the raw parameter bytes

    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);

    // this += scale * other
    void add_scaled(const MlpParams& other, double scale);
    double squared_norm() const;
};

MlpParams mlp_init_glorot(const MlpShape& shape, core::Rng& rng);

// One column per example; rows index input features.
using InputBatch = Eigen::SparseMatrix<double>;

struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;   // pre-activation per layer
    std::vector<Eigen::MatrixXd> post;  // ReLU output per hidden layer
};

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x);
Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const InputBatch& x, ForwardCache* cache = nullptr);

// Accumulates d(sum_ij dout_ij * out_ij)/d(params) into grad.
void mlp_backward(const MlpParams& p, const InputBatch& x, const ForwardCache& cache, const Eigen::MatrixXd& dout,
                  MlpParams& grad);

// Trainable network plus a frozen, independently initialized prior network.
struct PriorNetPair {
    MlpParams trainable;
    MlpParams prior;
    double prior_scale = 1.0;
    bool has_prior = true;

    static PriorNetPair init(const MlpShape& shape, core::Rng& rng, bool with_prior = true, double prior_scale = 1.0);
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const InputBatch& x) const;
    Eigen::MatrixXd prior_batch(const InputBatch& x) const;
};

InputBatch dense_to_batch(const Eigen::MatrixXd& columns);

}  // namespace rve::deep
