#pragma once

// Fully connected network with ReLU hidden layers and a linear output, with
// hand-written backpropagation over column-major batches (one sample per
// column).

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace sgl::rl {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

class Mlp {
 public:
  Mlp() = default;
  /// sizes = {inputs, hidden..., outputs}; weights zero-initialized.
  explicit Mlp(std::vector<int> sizes);

  /// He-normal hidden layers; the output layer is scaled by `output_gain`.
  void initialize(std::mt19937_64& rng, double output_gain);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each post-ReLU hidden
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache* cache = nullptr) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

  /// Accumulates dLoss/dparams into `grads` given dLoss/doutput.
  void backward(const Cache& cache, const Eigen::MatrixXd& output_grad, std::vector<DenseLayer>& grads) const;

  std::vector<DenseLayer> zero_like() const;

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

 private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

}  // namespace sgl::rl
