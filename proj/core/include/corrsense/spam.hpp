#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "corrsense/noise_model.hpp"

namespace corrsense {

// Exact density-matrix simulation of correlated dephasing on a small
// register, with preparation and measurement imperfections realized as
// random unitary-dilation channels. Everything here scales as 4^n in
// memory (the dilation acts on 2n qubits), hence the hard qubit cap.

inline constexpr int kMaxSpamQubits = 6;

/// Validated state on n qubits: Hermitian, unit trace, positive
/// semidefinite, all within `tol`.
struct DensityMatrix {
  int n = 0;
  Eigen::MatrixXcd rho;

  static DensityMatrix from(int n, const Eigen::MatrixXcd& rho, double tol = 1e-9);
};

/// Completely positive trace-preserving map in Kraus form. Built from a
/// unitary on 2n qubits with the n ancillas prepared in |0> and traced
/// out afterwards, which guarantees the CPTP property by construction.
struct QuantumChannel {
  int n = 0;
  std::vector<Eigen::MatrixXcd> kraus;

  /// sum_k K_k op K_k^dag; preserves Hermiticity, and the trace of any
  /// input.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& op) const;
};

/// Preparation and measurement channels of common strength delta. Each
/// comes from U = exp(i delta H) with H = (M + M^dag)/2 and the real and
/// imaginary parts of every entry of M drawn uniformly from [0, 1].
struct SpamChannelPair {
  int n = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  QuantumChannel prep;
  QuantumChannel meas;
};

/// Draw a deterministic channel pair. delta = 0 yields exact identity
/// channels. Throws CapacityError above kMaxSpamQubits.
SpamChannelPair random_spam_channels(int n, double delta, std::uint64_t seed);

/// Bit-string of a computational-basis index; qubit 0 occupies the
/// highest bit, so index 1 is |0...01>.
Eigen::VectorXi basis_bits(long index, int n);

/// rho0 = E0 = |psi><psi| for psi = (|a> + |b>)/sqrt(2) with a != b.
Eigen::MatrixXcd superposition_projector(const Eigen::VectorXi& a,
                                         const Eigen::VectorXi& b);

/// Dephasing propagator acting elementwise in the computational basis:
/// the (x, y) entry is scaled by exp((-gamma_xy + i omega_xy) t), with the
/// rates evaluated from the model for that pair of basis states. Diagonal
/// entries are fixed points, so the trace is preserved exactly.
Eigen::MatrixXcd evolve_dephasing(const Eigen::MatrixXcd& op, const NoiseModel& model,
                                  double t);
DensityMatrix evolve_dephasing(const DensityMatrix& state, const NoiseModel& model,
                               double t);

/// Survival probabilities Tr[E_meas(E0) E_t(E_prep(rho0))] over `times`
/// (nonnegative, non-decreasing) for the superposition of a and b. With
/// delta = 0 and a real model this is exactly (1 + exp(-Gamma t)) / 2.
std::vector<double> spam_decay_curve(const NoiseModel& model,
                                     const SpamChannelPair& channels,
                                     const Eigen::VectorXi& a, const Eigen::VectorXi& b,
                                     const std::vector<double>& times);

/// Single-exponential fit value = offset + amplitude * exp(-rate * t).
/// The offset is seeded from the tail mean, the rate from a log-linear
/// regression restricted to t <= 2 / rate_initial, then all three
/// parameters are refined jointly. Inputs that do not decay (constant
/// data, nonpositive initial rate, fewer than 4 usable points) come back
/// with converged = false rather than throwing.
struct DecayFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  bool converged = false;
  double rms = 0.0;
};

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values);

/// Sum of the absolute eigenvalues of a Hermitian matrix.
double trace_norm(const Eigen::MatrixXcd& m);

/// Largest absolute eigenvalue of a Hermitian matrix.
double operator_norm(const Eigen::MatrixXcd& m);

/// Perturbation sizes of a channel pair around the ideal protocol:
/// eps_s = ||prep(rho0) - rho0||_tr, eps_m = ||meas(E0) - E0||_op.
struct SpamNorms {
  double eps_s = 0.0;
  double eps_m = 0.0;
};

SpamNorms spam_perturbation_norms(const SpamChannelPair& channels,
                                  const Eigen::MatrixXcd& rho0,
                                  const Eigen::MatrixXcd& e0);

}  // namespace corrsense
