#ifndef SPINRL_QUANTUM_HPP_
#define SPINRL_QUANTUM_HPP_

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <shared_mutex>

#include "spinrl/rng.hpp"

namespace spinrl {

// State in the F_z = 0 Fock basis of the single-mode spin-1 system.
// amps[k] is the amplitude of |k, N-2k, k>, k = 0..N/2.
struct FockVector {
  int n_atoms = 2;
  Eigen::VectorXcd amps;

  int dim() const { return static_cast<int>(amps.size()); }
  double norm() const { return amps.norm(); }

  // Throws std::invalid_argument on wrong length or |norm - 1| > 1e-9.
  void validate() const;
};

// Real symmetric tridiagonal SMA Hamiltonian restricted to F_z = 0.
struct HamiltonianMatrix {
  int n_atoms = 2;
  double q = 0.0;
  double c2 = -1.0;
  Eigen::MatrixXd entries;
};

struct QuantumObservables {
  double rho0 = 1.0;
  double theta_s = 0.0;
};

// Throws std::invalid_argument unless n_atoms is even and >= 2.
void require_even_atoms(int n_atoms);

int fock_dim(int n_atoms);

HamiltonianMatrix build_hamiltonian(int n_atoms, double q, double c2);

// exp(-i H dt) for a real symmetric H, via its eigendecomposition.
class Propagator {
 public:
  explicit Propagator(const HamiltonianMatrix& h);

  Eigen::VectorXcd apply(const Eigen::VectorXcd& psi, double dt) const;
  Eigen::MatrixXcd unitary(double dt) const;

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

// Eigendecompositions keyed by q for one (N, c2). Lookups are shared,
// insertions take the exclusive lock.
class PropagatorCache {
 public:
  PropagatorCache(int n_atoms, double c2);

  std::shared_ptr<const Propagator> get(double q) const;
  std::size_t size() const;

 private:
  int n_atoms_;
  double c2_;
  mutable std::shared_mutex mutex_;
  mutable std::map<double, std::shared_ptr<const Propagator>> entries_;
};

FockVector propagate(const FockVector& psi, double q, double dt, double c2);

QuantumObservables observables(const FockVector& psi);

// <a1^dag a-1^dag a0 a0>; its argument is theta_s.
std::complex<double> pair_coherence(const FockVector& psi);

double fidelity(const FockVector& psi, const FockVector& target);

// <psi|H|psi>.
double energy(const FockVector& psi, const HamiltonianMatrix& h);

// Standard deviation of H in psi.
double energy_spread(const FockVector& psi, const HamiltonianMatrix& h);

FockVector fock_state(int n_atoms, int k);

// |N/2, 0, N/2>.
FockVector twin_fock(int n_atoms);

// |0, N, 0>: all atoms in m_F = 0.
FockVector polar_state(int n_atoms);

FockVector haar_random_state(int n_atoms, Rng& rng);

// N = 2 pseudo-spin on the Bloch sphere:
//   |psi> = cos(theta/2)|0,2,0> + sin(theta/2) e^{i phi}|1,0,1>.
struct BlochPoint {
  double theta = 0.0;
  double phi = 0.0;
};

// Rates of (theta, phi) under the N = 2 Hamiltonian. Throws
// std::domain_error within 1e-6 of a pole, where phi is undefined.
BlochPoint bloch_rates(const BlochPoint& p, double q, double c2);
BlochPoint bloch_oracle_step(const BlochPoint& p, double q, double dt, double c2);

FockVector bloch_to_fock(const BlochPoint& p);

// Quantum speed limit pi / (sqrt(2) |c2|) for |0,2,0> -> |1,0,1>.
double qsl_bound(double c2);

// Energy spread of |0,2,0> under the N = 2 Hamiltonian, sqrt(2)|c2|/2.
double initial_energy_spread_n2(double c2);

// Bhattacharyya bound arccos(|<psi_i|psi_f>|) / dE0.
double bhattacharyya_bound(double overlap, double delta_e0);

}  // namespace spinrl

#endif  // SPINRL_QUANTUM_HPP_
