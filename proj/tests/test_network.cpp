#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "spinrl/adam.hpp"
#include "spinrl/mlp.hpp"
#include "spinrl/policy.hpp"

using namespace spinrl;

namespace {

// Central differences with h = 1e-6.
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x) {
  const double h = 1e-6;
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double up = f(x);
    x(i) = keep - h;
    const double down = f(x);
    x(i) = keep;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, a.norm() + b.norm());
}

Mlp random_mlp(OutputActivation act, std::uint64_t seed) {
  Mlp m(3, {5, 4}, 2, act);
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 0.6);
  for (Eigen::Index i = 0; i < m.num_params(); ++i) m.params()(i) = nd(rng);
  return m;
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  for (auto act : {OutputActivation::kTanh, OutputActivation::kLinear}) {
    Mlp m(3, {8, 8}, 1, act);
    m.params().setZero();
    CHECK(m.forward(Eigen::Vector3d(0.3, -1.0, 2.0)).norm() == 0.0);
  }
}

TEST_CASE("single linear layer with identity weights reproduces input") {
  Mlp m(3, {}, 3, OutputActivation::kLinear);
  m.params().setZero();
  // W is column-major 3 x 3 followed by b.
  m.params()(0) = m.params()(4) = m.params()(8) = 1.0;
  const Eigen::Vector3d x(0.25, -4.0, 7.5);
  CHECK(m.forward(x) == x);
}

TEST_CASE("parameter count") {
  Mlp m(3, {64, 32}, 1, OutputActivation::kTanh);
  CHECK(m.num_params() == 3 * 64 + 64 + 64 * 32 + 32 + 32 + 1);
}

TEST_CASE("batch forward matches column-wise forward") {
  const Mlp m = random_mlp(OutputActivation::kTanh, 1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 7);
  const Eigen::MatrixXd y = m.forward_batch(x);
  for (int j = 0; j < 7; ++j) {
    CHECK((y.col(j) - m.forward(x.col(j))).norm() < 1e-15);
  }
}

TEST_CASE("backprop matches finite differences") {
  for (auto act : {OutputActivation::kTanh, OutputActivation::kLinear}) {
    Mlp m = random_mlp(act, 7);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 6);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Random(2, 6);
    auto loss = [&](const Eigen::VectorXd& p) {
      Mlp c = m;
      c.params() = p;
      const Eigen::MatrixXd y = c.forward_batch(x);
      return (y.array() * w.array()).sum() + 0.5 * y.squaredNorm();
    };
    Mlp::Tape tape;
    const Eigen::MatrixXd y = m.forward_batch(x, &tape);
    const Eigen::VectorXd analytic = m.backward(tape, w + y);
    const Eigen::VectorXd numeric = numeric_gradient(loss, m.params());
    CHECK(relative_error(analytic, numeric) < 1e-5);
  }
}

TEST_CASE("orthogonal init") {
  Mlp m(3, {16, 8}, 1, OutputActivation::kTanh);
  Rng rng(9);
  m.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  const Eigen::Map<const Eigen::MatrixXd> w0(m.params().data(), 16, 3);
  const Eigen::MatrixXd gram = w0.transpose() * w0;
  CHECK((gram - 2.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::Map<const Eigen::VectorXd> b0(m.params().data() + 48, 16);
  CHECK(b0.norm() == 0.0);
  const Eigen::Index w2_start = 48 + 16 + 16 * 8 + 8;
  const Eigen::Map<const Eigen::VectorXd> w2(m.params().data() + w2_start, 8);
  CHECK(w2.norm() == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("standard normal log density") {
  CHECK(gaussian_logprob(0.0, 0.0, 0.0) == doctest::Approx(-0.91894).epsilon(1e-5));
  CHECK(gaussian_logprob(0.0, 0.0, 0.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(gaussian_logprob(1.0, 0.0, 0.0) == doctest::Approx(-0.5 - 0.91893853320467).epsilon(1e-14));
  CHECK(gaussian_logprob(2.0, 1.0, std::log(2.0)) ==
        doctest::Approx(-0.125 - std::log(2.0) - 0.91893853320467).epsilon(1e-14));
}

TEST_CASE("policy mean lies inside the control range") {
  Rng rng(1);
  PolicyParams p = make_policy(3, {32, 16}, -6.0, 6.0, rng);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (Eigen::Index i = 0; i < p.actor.num_params(); ++i) p.actor.params()(i) = nd(rng);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d x(nd(rng), nd(rng), nd(rng));
    const double mu = action_mean(p, x);
    CHECK(mu >= -6.0);
    CHECK(mu <= 6.0);
  }
}

TEST_CASE("narrow policy concentrates around the mean") {
  Rng rng(2);
  PolicyParams p = make_policy(3, {32, 16}, -6.0, 6.0, rng);
  p.log_std = -5.0;
  const Eigen::Vector3d x(0.9, 1.0, 0.0);
  const double mu = action_mean(p, x);
  int far = 0;
  for (int i = 0; i < 100000; ++i) {
    if (std::abs(policy_sample(p, x, rng).action - mu) > 0.05) ++far;
  }
  CHECK(far == 0);
}

TEST_CASE("samples are reproducible and clipped") {
  Rng init(3);
  PolicyParams p = make_policy(3, {8}, -1.0, 1.0, init);
  p.log_std = 1.5;
  Rng a(77), b(77);
  const Eigen::Vector3d x(0.2, 0.0, 1.0);
  bool saw_clip = false;
  for (int i = 0; i < 200; ++i) {
    const PolicySample s = policy_sample(p, x, a);
    const PolicySample t = policy_sample(p, x, b);
    CHECK(s.action == t.action);
    CHECK(s.logprob == t.logprob);
    CHECK(s.action >= -1.0);
    CHECK(s.action <= 1.0);
    CHECK(s.logprob == gaussian_logprob(s.raw_action, action_mean(p, x), p.log_std));
    if (s.action != s.raw_action) saw_clip = true;
  }
  CHECK(saw_clip);
}

TEST_CASE("logprob gradient matches finite differences") {
  Rng rng(4);
  PolicyParams p = make_policy(3, {6, 5}, -6.0, 6.0, rng);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (Eigen::Index i = 0; i < p.actor.num_params(); ++i) p.actor.params()(i) = nd(rng);
  p.log_std = -0.3;
  const Eigen::Vector3d x(0.4, -0.6, 0.8);
  const double a = 1.7;
  auto f = [&](const Eigen::VectorXd& v) {
    PolicyParams c = p;
    c.set_actor_vector(v);
    return gaussian_logprob(a, action_mean(c, x), c.log_std);
  };
  const Eigen::VectorXd analytic = logprob_gradient(p, x, a);
  CHECK(relative_error(analytic, numeric_gradient(f, p.actor_vector())) < 1e-5);
}

TEST_CASE("actor vector round trip") {
  Rng rng(5);
  PolicyParams p = make_policy(3, {4}, -2.0, 3.0, rng);
  Eigen::VectorXd v = p.actor_vector();
  CHECK(v.size() == p.actor.num_params() + 1);
  v(v.size() - 1) = -1.25;
  p.set_actor_vector(v);
  CHECK(p.log_std == -1.25);
  CHECK(p.q_center() == 0.5);
  CHECK(p.q_half_range() == 2.5);
}

TEST_CASE("Adam first step moves each coordinate by lr") {
  Adam opt(3, 0.1);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  Eigen::VectorXd g(3);
  g << 4.0, -0.001, 0.0;
  opt.step(x, g);
  CHECK(x(0) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(x(1) == doctest::Approx(-1.9).epsilon(1e-4));
  CHECK(x(2) == 0.5);
  CHECK(opt.steps() == 1);
}

TEST_CASE("Adam minimizes a quadratic") {
  Adam opt(2, 0.05);
  Eigen::VectorXd x(2);
  x << 3.0, -4.0;
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd g = 2.0 * (x - Eigen::Vector2d(1.0, 2.0));
    opt.step(x, g);
  }
  CHECK((x - Eigen::Vector2d(1.0, 2.0)).norm() < 1e-3);
}
