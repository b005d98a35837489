#include "sgl/rl/mlp.hpp"

#include <cmath>

#include "sgl/errors.hpp"

namespace sgl::rl {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ValidationError("sizes", "need input and output widths");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]), Eigen::VectorXd::Zero(sizes_[l + 1])});
  }
}

void Mlp::initialize(std::mt19937_64& rng, double output_gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    DenseLayer& layer = layers_[l];
    const bool last = l + 1 == layers_.size();
    const double scale = std::sqrt((last ? 1.0 : 2.0) / layer.weight.cols()) * (last ? output_gain : 1.0);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = scale * normal(rng);
    layer.bias.setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache* cache) const {
  if (input.rows() != sizes_.front()) {
    throw ValidationError("input", "expected " + std::to_string(sizes_.front()) + " rows, got " +
                                       std::to_string(input.rows()));
  }
  if (cache) cache->activations.assign(1, input);
  Eigen::MatrixXd x = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * x;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) {
      z = z.cwiseMax(0.0);
      if (cache) cache->activations.push_back(z);
    }
    x = std::move(z);
  }
  return x;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                   std::vector<DenseLayer>& grads) const {
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Eigen::MatrixXd& in = cache.activations[l];
    grads[l].weight.noalias() += delta * in.transpose();
    grads[l].bias += delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layers_[l].weight.transpose() * delta;
    // ReLU gate of the previous layer's output.
    delta = (in.array() > 0.0).select(back, 0.0);
  }
}

std::vector<DenseLayer> Mlp::zero_like() const {
  std::vector<DenseLayer> g;
  for (const auto& l : layers_) {
    g.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

}  // namespace sgl::rl
