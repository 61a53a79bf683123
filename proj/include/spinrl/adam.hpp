#ifndef SPINRL_ADAM_HPP_
#define SPINRL_ADAM_HPP_

#include <Eigen/Dense>

namespace spinrl {

// Adaptive moment estimation, minimizing.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

  double lr() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

}  // namespace spinrl

#endif  // SPINRL_ADAM_HPP_
