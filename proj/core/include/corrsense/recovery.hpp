#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrsense/noise_model.hpp"
#include "corrsense/optim.hpp"
#include "corrsense/sensing.hpp"

namespace corrsense {

enum class RecoveryMode { naive, sequential, simultaneous, lasso };

struct RecoveryResult {
  Eigen::MatrixXd W;  // symmetric estimate of the correlation matrix
  RecoveryMode mode = RecoveryMode::sequential;
  // Residuals and flags describe the convex-program solution; when
  // psd_projected is set they refer to the iterate before projection.
  double residual_h = 0.0;  // ||measured probe rates - predicted||_2
  double residual_g = 0.0;  // ||diag(W) - g||_2
  long iterations = 0;
  bool solver_converged = true;
  bool feasible = true;
  bool psd_projected = false;
};

struct RecoveryOptions {
  SolverOptions solver;
  bool project_psd = false;
};

struct PairMeasurement {
  int i = 0;
  int j = 0;
  double gamma = 0.0;  // measured pair decay rate 2(c_ii + 2 c_ij + c_jj)
};

struct NaiveEstimate {
  Eigen::VectorXd g_hat;  // diagonal estimate
  Eigen::MatrixXd c_off;  // symmetric zero-diagonal off-diagonal estimate
};

// Direct inversion: g_j = gamma_j / 2 from the n single-qubit rates, then
// c_jk = gamma_jk/4 - (g_j + g_k)/2 from the n(n-1)/2 pair rates. Every
// diagonal index and every unordered pair must appear exactly once.
NaiveEstimate naive_reconstruct(const Eigen::VectorXd& single_gammas,
                                const std::vector<PairMeasurement>& pair_gammas, int n);

struct EpsilonPair {
  double eps1 = 0.0;
  double eps2 = 0.0;
};

// Constraint radii from relative measurement accuracies:
// eps_i = tau delta_i ||.||_2 / (1 - tau delta_i), valid for tau delta < 1/4.
EpsilonPair set_epsilons(const Eigen::VectorXd& g, const Eigen::VectorXd& h, double delta1,
                         double delta2, double tau);

struct LambdaConstants {
  double c_prime = 1.0;
  double c0 = 1.0;
};

// Regularization weight for the lasso path; grows with the measured scales
// ||g||_inf, ||h||_inf and the accuracies delta_1, delta_2. Requires the
// smallness conditions 2 sqrt(ln n / c0) delta_1 < 1/2 (and ln m for
// delta_2).
double set_lambda(const Eigen::VectorXd& g, const Eigen::VectorXd& h, long m, int n,
                  double delta1, double delta2, const LambdaConstants& k = {});

// Off-diagonal reconstruction with the diagonal pinned to g: minimizes
// ||uvec(W)||_1 subject to ||Q uvec(W) - (h - S g)||_2 <= eps2 + eps1 sqrt(mn).
RecoveryResult cs_sequential(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                             const SensingEnsemble& ensemble, double eps1, double eps2,
                             const RecoveryOptions& opts = {});

// Joint reconstruction: diagonal free within ||diag(W) - g||_2 <= eps1 and
// probe rates within ||apply_sensing(W) - h||_2 <= eps2.
RecoveryResult cs_simultaneous(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                               const SensingEnsemble& ensemble, double eps1, double eps2,
                               const RecoveryOptions& opts = {});

// Lagrangian form on the shifted data h' = h - S g with the diagonal pinned.
RecoveryResult cs_lasso(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                        const SensingEnsemble& ensemble, double lambda,
                        const RecoveryOptions& opts = {});

struct ComplexRecovery {
  Eigen::MatrixXd T;  // skew-symmetric, zero diagonal
  Eigen::MatrixXd R;  // symmetric, zero diagonal
  SolverDiagnostics diag;
};

// Joint sparse recovery of the phase parts from precession-frequency
// measurements of the ensemble's probes.
ComplexRecovery recover_complex(const Eigen::VectorXd& omega_measurements,
                                const SensingEnsemble& ensemble, double eps,
                                const RecoveryOptions& opts = {});

enum class BoundMode { naive, rip, ripless };

struct ModelStats {
  int n = 0;
  long s = 0;
  double diag_l2 = 0.0;
  double diag_inf = 0.0;
  double offdiag_fro = 0.0;
  double eta_s = 0.0;  // l1 defect of the best s-pair approximation
};

ModelStats stats_of(const NoiseModel& model);

// Expected squared Frobenius error bound of the naive off-diagonal
// estimator: 3(n-1)(d1+d2)^2 ||diag||_2^2 + 6 d2^2 ||C'||_F^2.
double naive_error_bound_sq(const ModelStats& stats, double delta1, double delta2);

// Scaling-level error predictions (unit constants); report annotation only,
// never a pass/fail gate.
double theoretical_bounds(const ModelStats& stats, double delta1, double delta2, long m,
                          BoundMode mode);

}  // namespace corrsense
