#include "spinrl/mlp.hpp"

#include <stdexcept>
#include <string>

namespace spinrl {

Mlp::Mlp(int input_size, std::vector<int> hidden_sizes, int output_size,
         OutputActivation output_activation)
    : output_activation_(output_activation) {
  if (input_size < 1 || output_size < 1) {
    throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  sizes_.push_back(input_size);
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("Mlp: hidden sizes must be positive");
    sizes_.push_back(h);
  }
  sizes_.push_back(output_size);

  Eigen::Index total = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int l) const {
  return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int l) const {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
          sizes_[l + 1]};
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  return forward_batch(x, nullptr).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.rows() != input_size()) {
    throw std::invalid_argument("Mlp: expected input of size " + std::to_string(input_size()) +
                                ", got " + std::to_string(x.rows()));
  }
  if (tape) {
    tape->activations.clear();
    tape->activations.push_back(x);
  }
  Eigen::MatrixXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    const bool last = l + 1 == num_layers();
    if (!last || output_activation_ == OutputActivation::kTanh) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
    if (tape) tape->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out) const {
  if (static_cast<int>(tape.activations.size()) != num_layers() + 1) {
    throw std::invalid_argument("Mlp::backward: tape does not match network");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd delta = grad_out;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& out = tape.activations[l + 1];
    const bool last = l + 1 == num_layers();
    if (!last || output_activation_ == OutputActivation::kTanh) {
      delta.array() *= 1.0 - out.array().square();
    }
    const Eigen::MatrixXd& in = tape.activations[l];
    const Eigen::Index rows = sizes_[l + 1];
    const Eigen::Index cols = sizes_[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + offsets_[l], rows, cols).noalias() =
        delta * in.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + offsets_[l] + rows * cols, rows) =
        delta.rowwise().sum();
    if (l > 0) delta = weight(l).transpose() * delta;
  }
  return grad;
}

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
  std::normal_distribution<double> normal(0.0, 1.0);
  params_.setZero();
  for (int l = 0; l < num_layers(); ++l) {
    const int rows = sizes_[l + 1];
    const int cols = sizes_[l];
    const int big = std::max(rows, cols);
    Eigen::MatrixXd g(big, big);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // Sign fix makes the draw uniform over the orthogonal group.
    const Eigen::VectorXd diag = qr.matrixQR().diagonal();
    for (int j = 0; j < big; ++j) {
      if (diag(j) < 0.0) q.col(j) *= -1.0;
    }
    const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    Eigen::Map<Eigen::MatrixXd>(params_.data() + offsets_[l], rows, cols) =
        gain * q.topLeftCorner(rows, cols);
  }
}

}  // namespace spinrl
