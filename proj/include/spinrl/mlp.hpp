#ifndef SPINRL_MLP_HPP_
#define SPINRL_MLP_HPP_

#include <Eigen/Dense>

#include <vector>

#include "spinrl/rng.hpp"

namespace spinrl {

enum class OutputActivation { kTanh, kLinear };

// Fully connected network with tanh hidden layers. All weights and biases
// live in one flat vector so optimizers and gradient checks can treat the
// network as a point in R^n. Layer l stores W_l (out x in, column-major)
// followed by b_l.
class Mlp {
 public:
  // Activations of every layer for a batch, input first. Columns are samples.
  struct Tape {
    std::vector<Eigen::MatrixXd> activations;
  };

  Mlp() = default;
  Mlp(int input_size, std::vector<int> hidden_sizes, int output_size,
      OutputActivation output_activation);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_activation_; }
  Eigen::Index num_params() const { return params_.size(); }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // x is input_size x batch. Fills tape when non-null.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;

  // Gradient of sum_j <grad_out.col(j), y_j> with respect to params.
  Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& grad_out) const;

  // Orthogonal weights, zero biases.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain);

 private:
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Map<const Eigen::MatrixXd> weight(int l) const;
  Eigen::Map<const Eigen::VectorXd> bias(int l) const;

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  OutputActivation output_activation_ = OutputActivation::kLinear;
  Eigen::VectorXd params_;
};

}  // namespace spinrl

#endif  // SPINRL_MLP_HPP_
