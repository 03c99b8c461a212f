#pragma once

#include <Eigen/Dense>

#include "corrsense/errors.hpp"

namespace corrsense {

struct SolverOptions {
  long max_iterations = 50000;
  double tol_abs = 1e-8;
  double tol_rel = 1e-6;
  double rho0 = 1.0;         // initial splitting penalty
  double step_safety = 1.1;  // gradient step 1/(step_safety * L)
  // Optional caller-supplied Gram matrix Q*Q^T (or B*B^T), used verbatim when
  // its size matches; lets sweeps reuse prefix Grams across nested row sets.
  const Eigen::MatrixXd* gram = nullptr;
  // Optional warm start for the primal iterate (length checked).
  const Eigen::VectorXd* warm_start = nullptr;
};

struct SolverDiagnostics {
  bool converged = false;
  bool feasible = false;  // constrained modes: residual within radius + slack
  bool monotone = true;   // accelerated gradient: objective never increased
  long iterations = 0;
  double objective = 0.0;
  double residual_norm = 0.0;   // ||Q w - y||_2 at the returned iterate
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double kkt_residual = 0.0;
};

/// Entrywise sign(x) * max(|x| - lambda, 0); ties at |x| = lambda map to 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double lambda);

struct LassoResult {
  Eigen::VectorXd w;
  SolverDiagnostics diag;
};

/// minimize (1/2)||Q w - y||_2^2 + lambda ||w||_1 via monotone accelerated
/// proximal gradient; the step size is 1/(step_safety * L) with L estimated
/// by power iteration, so runs are deterministic (no line search).
LassoResult lasso_solve(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y, double lambda,
                        const SolverOptions& opts = {});

struct ConstrainedL1Result {
  Eigen::VectorXd w;
  SolverDiagnostics diag;
};

/// minimize ||w||_1 subject to ||Q w - y||_2 <= eps, via alternating-direction
/// splitting with residual-balanced penalty. eps = 0 is equality-constrained
/// basis pursuit. Deterministic; identical inputs give identical iterates.
ConstrainedL1Result constrained_l1_solve(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                         double eps, const SolverOptions& opts = {});

/// Two-block variant: x = [x_free; x_l1] with B = [columns for both blocks].
/// minimize ||x_l1||_1  subject to  ||B x - y||_2 <= residual_radius
///                      and         ||x_free - free_center||_2 <= free_radius.
/// free_dim = 0 reduces to constrained_l1_solve.
struct PartitionedL1Program {
  Eigen::MatrixXd B;
  Eigen::VectorXd y;
  double residual_radius = 0.0;
  int free_dim = 0;
  Eigen::VectorXd free_center;
  double free_radius = 0.0;
};

struct PartitionedL1Result {
  Eigen::VectorXd x;
  SolverDiagnostics diag;
};

PartitionedL1Result partitioned_l1_solve(const PartitionedL1Program& prog,
                                         const SolverOptions& opts = {});

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, matching order
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Post: ||M - U diag(w) U^T||_F <= 1e-10 ||M||_F, ||U^T U - I|| <= 1e-10.
EigenDecomposition sym_eigen(const Eigen::MatrixXd& M, double symmetry_tol = 1e-9);

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues
/// truncated). Already-PSD inputs are returned unchanged, so the projection
/// is exactly idempotent.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M);

}  // namespace corrsense
