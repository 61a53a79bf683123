#include "spinrl/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "spinrl/meanfield.hpp"

namespace spinrl {

namespace {

constexpr double kNormTol = 1e-9;
constexpr double kCoherenceFloor = 1e-12;
constexpr double kPoleGuard = 1e-6;

// Matrix element of a1^dag a-1^dag a0 a0 between |k> and |k+1>.
double pair_element(int n_atoms, int k) {
  const double n0 = n_atoms - 2 * k;
  return (k + 1) * std::sqrt(n0 * (n0 - 1.0));
}

}  // namespace

void require_even_atoms(int n_atoms) {
  if (n_atoms < 2 || n_atoms % 2 != 0) {
    throw std::invalid_argument("n_atoms: must be even and >= 2, got " +
                                std::to_string(n_atoms));
  }
}

int fock_dim(int n_atoms) {
  require_even_atoms(n_atoms);
  return n_atoms / 2 + 1;
}

void FockVector::validate() const {
  if (dim() != fock_dim(n_atoms)) {
    throw std::invalid_argument("FockVector: length " + std::to_string(dim()) +
                                " does not match N/2+1 for N=" + std::to_string(n_atoms));
  }
  if (std::abs(norm() - 1.0) > kNormTol) {
    throw std::invalid_argument("FockVector: not normalized (norm " +
                                std::to_string(norm()) + ")");
  }
}

HamiltonianMatrix build_hamiltonian(int n_atoms, double q, double c2) {
  const int d = fock_dim(n_atoms);
  HamiltonianMatrix h{n_atoms, q, c2, Eigen::MatrixXd::Zero(d, d)};
  const double n = n_atoms;
  for (int k = 0; k < d; ++k) {
    const double n0 = n - 2.0 * k;
    const double n_pm = 2.0 * k;
    h.entries(k, k) = c2 / (2.0 * n) * (2.0 * n0 - 1.0) * n_pm - q * n0;
    if (k + 1 < d) {
      const double off = c2 / n * pair_element(n_atoms, k);
      h.entries(k + 1, k) = off;
      h.entries(k, k + 1) = off;
    }
  }
  return h;
}

Propagator::Propagator(const HamiltonianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.entries);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Propagator: eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

Eigen::VectorXcd Propagator::apply(const Eigen::VectorXcd& psi, double dt) const {
  Eigen::VectorXcd coeffs = eigenvectors_.transpose().cast<std::complex<double>>() * psi;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    coeffs(i) *= std::polar(1.0, -eigenvalues_(i) * dt);
  }
  return eigenvectors_.cast<std::complex<double>>() * coeffs;
}

Eigen::MatrixXcd Propagator::unitary(double dt) const {
  const Eigen::Index d = eigenvalues_.size();
  Eigen::VectorXcd phases(d);
  for (Eigen::Index i = 0; i < d; ++i) phases(i) = std::polar(1.0, -eigenvalues_(i) * dt);
  const Eigen::MatrixXcd v = eigenvectors_.cast<std::complex<double>>();
  return v * phases.asDiagonal() * v.transpose();
}

PropagatorCache::PropagatorCache(int n_atoms, double c2) : n_atoms_(n_atoms), c2_(c2) {
  require_even_atoms(n_atoms);
}

std::shared_ptr<const Propagator> PropagatorCache::get(double q) const {
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(q);
    if (it != entries_.end()) return it->second;
  }
  auto built = std::make_shared<const Propagator>(build_hamiltonian(n_atoms_, q, c2_));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = entries_.emplace(q, std::move(built));
  return it->second;
}

std::size_t PropagatorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

FockVector propagate(const FockVector& psi, double q, double dt, double c2) {
  const Propagator prop(build_hamiltonian(psi.n_atoms, q, c2));
  return {psi.n_atoms, prop.apply(psi.amps, dt)};
}

std::complex<double> pair_coherence(const FockVector& psi) {
  std::complex<double> acc = 0.0;
  for (int k = 0; k + 1 < psi.dim(); ++k) {
    acc += std::conj(psi.amps(k + 1)) * pair_element(psi.n_atoms, k) * psi.amps(k);
  }
  return acc;
}

QuantumObservables observables(const FockVector& psi) {
  QuantumObservables obs;
  double n0 = 0.0;
  for (int k = 0; k < psi.dim(); ++k) {
    n0 += (psi.n_atoms - 2.0 * k) * std::norm(psi.amps(k));
  }
  obs.rho0 = std::clamp(n0 / psi.n_atoms, 0.0, 1.0);
  const std::complex<double> c = pair_coherence(psi);
  // Pure Fock states carry no phase; report 0 there.
  obs.theta_s = std::abs(c) < kCoherenceFloor ? 0.0 : wrap_phase(std::arg(c));
  return obs;
}

double fidelity(const FockVector& psi, const FockVector& target) {
  if (psi.dim() != target.dim()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  return std::clamp(std::norm(target.amps.dot(psi.amps)), 0.0, 1.0);
}

double energy(const FockVector& psi, const HamiltonianMatrix& h) {
  return (psi.amps.adjoint() * h.entries.cast<std::complex<double>>() * psi.amps)(0, 0).real();
}

double energy_spread(const FockVector& psi, const HamiltonianMatrix& h) {
  const Eigen::VectorXcd h_psi = h.entries.cast<std::complex<double>>() * psi.amps;
  const double mean = psi.amps.dot(h_psi).real();
  const double second = h_psi.squaredNorm();
  return std::sqrt(std::max(0.0, second - mean * mean));
}

FockVector fock_state(int n_atoms, int k) {
  const int d = fock_dim(n_atoms);
  if (k < 0 || k >= d) throw std::invalid_argument("fock_state: k out of range");
  FockVector v{n_atoms, Eigen::VectorXcd::Zero(d)};
  v.amps(k) = 1.0;
  return v;
}

FockVector twin_fock(int n_atoms) { return fock_state(n_atoms, n_atoms / 2); }

FockVector polar_state(int n_atoms) { return fock_state(n_atoms, 0); }

FockVector haar_random_state(int n_atoms, Rng& rng) {
  const int d = fock_dim(n_atoms);
  std::normal_distribution<double> normal(0.0, 1.0);
  FockVector v{n_atoms, Eigen::VectorXcd(d)};
  for (int k = 0; k < d; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v.amps(k) = {re, im};
  }
  v.amps /= v.amps.norm();
  return v;
}

BlochPoint bloch_rates(const BlochPoint& p, double q, double c2) {
  if (std::abs(p.theta) < kPoleGuard || std::abs(p.theta - std::numbers::pi) < kPoleGuard) {
    throw std::domain_error("bloch_rates: theta too close to a pole");
  }
  const double half = 0.5 * p.theta;
  const double r2 = std::numbers::sqrt2;
  BlochPoint rate;
  rate.theta = -r2 * c2 * std::sin(p.phi);
  rate.phi = -2.0 * q + 0.5 * c2 +
             0.5 * r2 * c2 * std::cos(p.phi) * (std::tan(half) - 1.0 / std::tan(half));
  return rate;
}

BlochPoint bloch_oracle_step(const BlochPoint& p, double q, double dt, double c2) {
  const BlochPoint k1 = bloch_rates(p, q, c2);
  const BlochPoint k2 =
      bloch_rates({p.theta + 0.5 * dt * k1.theta, p.phi + 0.5 * dt * k1.phi}, q, c2);
  const BlochPoint k3 =
      bloch_rates({p.theta + 0.5 * dt * k2.theta, p.phi + 0.5 * dt * k2.phi}, q, c2);
  const BlochPoint k4 = bloch_rates({p.theta + dt * k3.theta, p.phi + dt * k3.phi}, q, c2);
  return {p.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
          p.phi + dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi)};
}

FockVector bloch_to_fock(const BlochPoint& p) {
  FockVector v{2, Eigen::VectorXcd(2)};
  v.amps(0) = std::cos(0.5 * p.theta);
  v.amps(1) = std::polar(std::sin(0.5 * p.theta), p.phi);
  return v;
}

double qsl_bound(double c2) {
  if (c2 == 0.0) throw std::invalid_argument("qsl_bound: c2 must be nonzero");
  return std::numbers::pi / (std::numbers::sqrt2 * std::abs(c2));
}

double initial_energy_spread_n2(double c2) {
  if (c2 == 0.0) throw std::invalid_argument("initial_energy_spread_n2: c2 must be nonzero");
  return std::numbers::sqrt2 * std::abs(c2) / 2.0;
}

double bhattacharyya_bound(double overlap, double delta_e0) {
  return std::acos(std::clamp(std::abs(overlap), 0.0, 1.0)) / delta_e0;
}

}  // namespace spinrl
