#pragma once

#include <string>
#include <vector>

#include "rve/deep/mlp.hpp"

namespace rve::deep {

// A minibatch in network form. x_col[j] is the column of `x` holding s_j
// (identity when empty); next_col[j] indexes the column of `x_next` holding
// s'_j, or -1 when the transition ended the episode. Repeated states can
// share a column. Prior outputs may be supplied precomputed
// (num_outputs x cols).
struct TdBatch {
    InputBatch x;
    InputBatch x_next;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<int> x_col;
    std::vector<int> next_col;
    Eigen::MatrixXd prior_x;
    Eigen::MatrixXd prior_next;

    int size() const { return int(actions.size()); }
};

struct TdResult {
    double loss = 0.0;
    MlpParams grad;  // with respect to the trainable network only
};

// loss = sum_j (r_j + gamma * max_a' Q_target(s'_j, a') - Q_theta(s_j, a_j))^2,
// the target term held constant.
TdResult td_loss_and_grad(const PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, double gamma);

enum class Optimizer { sgd, adam };

struct SgdOptions {
    double learning_rate = 1e-3;
    double gamma = 0.99;
    // divide the TD loss by the minibatch size
    bool mean_loss = false;
    // optional explicit regularizer reg_weight * ||theta - anchor||^2
    double reg_weight = 0.0;
    const MlpParams* anchor = nullptr;
};

// TD loss plus regularizer, with its gradient.
TdResult training_loss_and_grad(const PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch,
                                const SgdOptions& opts);

// One step theta <- theta - alpha * grad(loss + regularizer). Returns the loss.
double sgd_step(PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, const SgdOptions& opts);

struct AdamState {
    MlpParams m;
    MlpParams v;
    long steps = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_shape(const MlpShape& shape);
};

// Adam update on the same objective. Returns the loss.
double adam_step(PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, const SgdOptions& opts,
                 AdamState& state);

Optimizer parse_optimizer(const std::string& s);
std::string to_string(Optimizer o);

}  // namespace rve::deep
