#include "rve/deep/td.hpp"

#include <cmath>
#include <stdexcept>

namespace rve::deep {

namespace {

Eigen::MatrixXd prior_or(const PriorNetPair& net, const InputBatch& x, const Eigen::MatrixXd& given) {
    if (!net.has_prior) return Eigen::MatrixXd::Zero(net.trainable.shape.num_outputs, x.cols());
    if (given.size() != 0) {
        if (given.cols() != x.cols() || given.rows() != net.trainable.shape.num_outputs)
            throw std::invalid_argument("cached prior outputs have wrong shape");
        return given;
    }
    return net.prior_batch(x);
}

}  // namespace

TdResult td_loss_and_grad(const PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, double gamma) {
    const int B = batch.size();
    if (B == 0) throw std::invalid_argument("empty minibatch");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
    if (int(batch.rewards.size()) != B || int(batch.next_col.size()) != B)
        throw std::invalid_argument("inconsistent minibatch");
    if (batch.x_col.empty() ? batch.x.cols() != B : int(batch.x_col.size()) != B)
        throw std::invalid_argument("inconsistent minibatch");

    Eigen::VectorXd next_value;
    if (batch.x_next.cols() > 0) {
        Eigen::MatrixXd qn = mlp_forward_batch(target.trainable, batch.x_next);
        qn += prior_or(target, batch.x_next, batch.prior_next);
        next_value = qn.colwise().maxCoeff().transpose();
    }

    ForwardCache cache;
    Eigen::MatrixXd q = mlp_forward_batch(theta.trainable, batch.x, &cache);
    const Eigen::MatrixXd prior = prior_or(theta, batch.x, batch.prior_x);

    TdResult res;
    res.grad = MlpParams::zeros(theta.trainable.shape);
    Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    for (int j = 0; j < B; ++j) {
        const int a = batch.actions[j];
        if (a < 0 || a >= q.rows()) throw std::invalid_argument("action out of range");
        const int c = batch.x_col.empty() ? j : batch.x_col[j];
        if (c < 0 || c >= q.cols()) throw std::invalid_argument("state column out of range");
        const int n = batch.next_col[j];
        if (n >= next_value.size()) throw std::invalid_argument("next-state column out of range");
        double y = batch.rewards[j];
        if (n >= 0) y += gamma * next_value[n];
        const double err = q(a, c) + prior(a, c) - y;
        res.loss += err * err;
        dout(a, c) += 2.0 * err;
    }
    mlp_backward(theta.trainable, batch.x, cache, dout, res.grad);
    return res;
}

TdResult training_loss_and_grad(const PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch,
                                const SgdOptions& opts) {
    auto res = td_loss_and_grad(theta, target, batch, opts.gamma);
    if (opts.mean_loss) {
        const double inv = 1.0 / batch.size();
        res.loss *= inv;
        for (auto& w : res.grad.weights) w *= inv;
        for (auto& b : res.grad.biases) b *= inv;
    }
    if (opts.reg_weight > 0.0) {
        if (!opts.anchor) throw std::invalid_argument("regularizer needs an anchor");
        MlpParams diff = theta.trainable;
        diff.add_scaled(*opts.anchor, -1.0);
        res.loss += opts.reg_weight * diff.squared_norm();
        res.grad.add_scaled(diff, 2.0 * opts.reg_weight);
    }
    return res;
}

double sgd_step(PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, const SgdOptions& opts) {
    auto res = training_loss_and_grad(theta, target, batch, opts);
    theta.trainable.add_scaled(res.grad, -opts.learning_rate);
    return res.loss;
}

AdamState AdamState::for_shape(const MlpShape& shape) {
    AdamState s;
    s.m = MlpParams::zeros(shape);
    s.v = MlpParams::zeros(shape);
    return s;
}

double adam_step(PriorNetPair& theta, const PriorNetPair& target, const TdBatch& batch, const SgdOptions& opts,
                 AdamState& st) {
    auto res = training_loss_and_grad(theta, target, batch, opts);
    ++st.steps;
    const double c1 = 1.0 - std::pow(st.beta1, double(st.steps));
    const double c2 = 1.0 - std::pow(st.beta2, double(st.steps));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = st.beta1 * m + (1.0 - st.beta1) * g;
        v = st.beta2 * v + (1.0 - st.beta2) * g.cwiseProduct(g);
        param.array() -= opts.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + st.epsilon);
    };
    for (std::size_t l = 0; l < res.grad.weights.size(); ++l) {
        update(theta.trainable.weights[l], st.m.weights[l], st.v.weights[l], res.grad.weights[l]);
        update(theta.trainable.biases[l], st.m.biases[l], st.v.biases[l], res.grad.biases[l]);
    }
    return res.loss;
}

Optimizer parse_optimizer(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer '" + s + "'");
}

std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

}  // namespace rve::deep
