#include "rve/deep/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace rve::deep {

std::size_t MlpShape::num_params() const {
    std::size_t n = 0;
    for (int l = 0; l < num_layers(); ++l) n += std::size_t(layer_out(l)) * (layer_in(l) + 1);
    return n;
}

void MlpShape::validate() const {
    if (input_dim < 1 || num_outputs < 1) throw std::invalid_argument("layer sizes must be positive");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("layer sizes must be positive");
}

MlpParams MlpParams::zeros(const MlpShape& shape) {
    shape.validate();
    MlpParams p;
    p.shape = shape;
    for (int l = 0; l < shape.num_layers(); ++l) {
        p.weights.push_back(Eigen::MatrixXd::Zero(shape.layer_out(l), shape.layer_in(l)));
        p.biases.push_back(Eigen::VectorXd::Zero(shape.layer_out(l)));
    }
    return p;
}

bool MlpParams::finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
}

std::uint64_t MlpParams::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const double* d, std::size_t n) {
        const auto* b = reinterpret_cast<const unsigned char*>(d);
        for (std::size_t i = 0; i < n * sizeof(double); ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t l = 0; l < weights.size(); ++l) {
        mix(weights[l].data(), std::size_t(weights[l].size()));
        mix(biases[l].data(), std::size_t(biases[l].size()));
    }
    return h;
}

std::vector<double> MlpParams::flatten() const {
    std::vector<double> out;
    out.reserve(shape.num_params());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.insert(out.end(), weights[l].data(), weights[l].data() + weights[l].size());
        out.insert(out.end(), biases[l].data(), biases[l].data() + biases[l].size());
    }
    return out;
}

void MlpParams::unflatten(const std::vector<double>& flat) {
    if (flat.size() != shape.num_params()) throw std::invalid_argument("flat parameter vector has wrong length");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        std::memcpy(weights[l].data(), flat.data() + k, sizeof(double) * weights[l].size());
        k += weights[l].size();
        std::memcpy(biases[l].data(), flat.data() + k, sizeof(double) * biases[l].size());
        k += biases[l].size();
    }
}

void MlpParams::add_scaled(const MlpParams& o, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l].noalias() += scale * o.weights[l];
        biases[l].noalias() += scale * o.biases[l];
    }
}

double MlpParams::squared_norm() const {
    double s = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) s += weights[l].squaredNorm() + biases[l].squaredNorm();
    return s;
}

MlpParams mlp_init_glorot(const MlpShape& shape, core::Rng& rng) {
    auto p = MlpParams::zeros(shape);
    for (int l = 0; l < shape.num_layers(); ++l) {
        const double limit = std::sqrt(6.0 / (shape.layer_in(l) + shape.layer_out(l)));
        auto& w = p.weights[l];
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = limit * (2.0 * core::uniform01(rng) - 1.0);
    }
    return p;
}

Eigen::MatrixXd mlp_forward_batch(const MlpParams& p, const InputBatch& x, ForwardCache* cache) {
    if (x.rows() != p.shape.input_dim) throw std::invalid_argument("input dimension mismatch");
    const int L = p.shape.num_layers();
    if (cache) {
        cache->pre.resize(L);
        cache->post.resize(L - 1);
    }
    Eigen::MatrixXd z = p.weights[0] * x;
    z.colwise() += p.biases[0];
    for (int l = 1; l < L; ++l) {
        Eigen::MatrixXd h = z.cwiseMax(0.0);
        if (cache) {
            cache->pre[l - 1] = std::move(z);
            cache->post[l - 1] = h;
        }
        z.noalias() = p.weights[l] * h;
        z.colwise() += p.biases[l];
    }
    if (cache) cache->pre[L - 1] = z;
    return z;
}

Eigen::VectorXd mlp_forward(const MlpParams& p, const Eigen::VectorXd& x) {
    if (x.size() != p.shape.input_dim) throw std::invalid_argument("input dimension mismatch");
    Eigen::VectorXd h = x;
    const int L = p.shape.num_layers();
    for (int l = 0; l < L; ++l) {
        Eigen::VectorXd z = p.weights[l] * h + p.biases[l];
        h = l + 1 < L ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
    }
    return h;
}

void mlp_backward(const MlpParams& p, const InputBatch& x, const ForwardCache& cache, const Eigen::MatrixXd& dout,
                  MlpParams& grad) {
    const int L = p.shape.num_layers();
    Eigen::MatrixXd dz = dout;
    for (int l = L - 1; l >= 0; --l) {
        grad.biases[l].noalias() += dz.rowwise().sum();
        if (l == 0) {
            grad.weights[0] += dz * x.transpose();
            break;
        }
        grad.weights[l].noalias() += dz * cache.post[l - 1].transpose();
        Eigen::MatrixXd dh = p.weights[l].transpose() * dz;
        dz = dh.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
}

PriorNetPair PriorNetPair::init(const MlpShape& shape, core::Rng& rng, bool with_prior, double prior_scale) {
    PriorNetPair n;
    n.trainable = mlp_init_glorot(shape, rng);
    n.has_prior = with_prior;
    n.prior_scale = prior_scale;
    n.prior = with_prior ? mlp_init_glorot(shape, rng) : MlpParams::zeros(shape);
    return n;
}

Eigen::VectorXd PriorNetPair::forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = mlp_forward(trainable, x);
    if (has_prior) out += prior_scale * mlp_forward(prior, x);
    return out;
}

Eigen::MatrixXd PriorNetPair::prior_batch(const InputBatch& x) const {
    if (!has_prior) return Eigen::MatrixXd::Zero(trainable.shape.num_outputs, x.cols());
    return prior_scale * mlp_forward_batch(prior, x);
}

Eigen::MatrixXd PriorNetPair::forward_batch(const InputBatch& x) const {
    Eigen::MatrixXd out = mlp_forward_batch(trainable, x);
    if (has_prior) out += prior_scale * mlp_forward_batch(prior, x);
    return out;
}

InputBatch dense_to_batch(const Eigen::MatrixXd& columns) { return columns.sparseView(0.0, 0.0); }

}  // namespace rve::deep
