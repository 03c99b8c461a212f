#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "corrsense/errors.hpp"

namespace corrsense {

inline constexpr double kDefaultPsdTol = 1e-9;
inline constexpr double kDefaultZeroTol = 1e-12;

/// Correlated-dephasing noise description for n qubits.
///
/// The pairwise rate matrix is V + iT (V symmetric, T skew-symmetric, the sum
/// positive semidefinite); R is the symmetric coefficient matrix of the
/// coherent two-body shift that accompanies the dissipation. Real-only models
/// have T = R = 0. Matrices are stored dense; sparsity is tracked separately.
struct NoiseModel {
  int n = 0;
  Eigen::MatrixXd V;
  Eigen::MatrixXd T;
  Eigen::MatrixXd R;

  /// Real-only model (T = R = 0).
  static NoiseModel real(Eigen::MatrixXd v);
  bool is_real(double tol = kDefaultZeroTol) const;
};

/// Off-diagonal sparsity: count and index set of strictly-upper-triangular
/// entries of V + iT with magnitude above tol.
struct SparsityProfile {
  int s = 0;
  std::vector<std::pair<int, int>> support;
};

struct ValidationReport {
  bool v_symmetric = false;
  bool t_skew_symmetric = false;
  bool r_symmetric = false;
  bool psd = false;
  bool diag_nonnegative = false;
  double min_eigenvalue = 0.0;
  SparsityProfile sparsity;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Check the structural invariants of a model; the report lists every
/// violated invariant and the minimum eigenvalue of V + iT.
ValidationReport validate(const NoiseModel& model, double tol_psd = kDefaultPsdTol);

/// Decay rate of the coherence selected by r in {-1,0,1}^n: 2 r^T V r.
double decay_rate(const NoiseModel& model, const Eigen::VectorXi& r);

struct ComplexRates {
  double gamma = 0.0;
  double omega = 0.0;
};

/// Decay rate and rotation frequency of the coherence between basis states
/// with sign vectors alpha, beta in {-1,+1}^n:
///   gamma = (1/2)(alpha-beta)^T V (alpha-beta)
///   omega = -(alpha^T R alpha - beta^T R beta)
///           + (1/2)(alpha^T T beta - beta^T T alpha)
ComplexRates complex_rates(const NoiseModel& model, const Eigen::VectorXi& alpha,
                           const Eigen::VectorXi& beta);

/// Coherence factor exp((-gamma + i omega) t) between bit-strings a and b.
std::complex<double> coherence_factor(const NoiseModel& model, const Eigen::VectorXi& a,
                                      const Eigen::VectorXi& b, double t);

/// Random real model: rate 2 on the diagonal and rate 1/2 on s_pairs adjacent
/// pairs of a chain, conjugated by a seeded random permutation. Positive
/// semidefinite by construction; exactly s_pairs strictly-upper nonzeros.
NoiseModel random_sparse_model(int n, int s_pairs, std::uint64_t seed);

/// Flattened index of the strictly-upper pair (i, j), i < j, in row-major
/// upper-triangle order; d = n(n-1)/2 total pairs.
inline int pair_index(int i, int j, int n) {
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}
std::pair<int, int> pair_from_index(int k, int n);

/// Strictly-upper-triangular entries of M as a vector of length n(n-1)/2.
Eigen::VectorXd uvec(const Eigen::MatrixXd& M);
/// Symmetric zero-diagonal matrix whose strictly-upper entries are v.
Eigen::MatrixXd uvec_inverse(const Eigen::VectorXd& v);
Eigen::VectorXd diag_of(const Eigen::MatrixXd& M);
/// M with its diagonal zeroed.
Eigen::MatrixXd off_diag_of(const Eigen::MatrixXd& M);

/// Sparsity profile of V + iT above tol (strictly upper triangle).
SparsityProfile sparsity_of(const NoiseModel& model, double tol = kDefaultZeroTol);

namespace detail {
Eigen::VectorXi signs_from_bits(const Eigen::VectorXi& bits);
void require_square(const Eigen::MatrixXd& M, int n, const char* name);
}  // namespace detail

}  // namespace corrsense
