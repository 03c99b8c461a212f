#include "corrsense/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

void check_lengths(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                   const SensingEnsemble& ensemble, const char* who) {
  if (g.size() != ensemble.n)
    throw StructuralError(std::string(who) + ": g length differs from ensemble n");
  if (h.size() != ensemble.m())
    throw StructuralError(std::string(who) + ": h length differs from ensemble m");
  if (!g.allFinite() || !h.allFinite())
    throw StructuralError(std::string(who) + ": data must be finite");
}

// Symmetric matrix with the given diagonal and strictly-upper entries.
Eigen::MatrixXd assemble(const Eigen::VectorXd& diagonal, const Eigen::VectorXd& off) {
  Eigen::MatrixXd W = uvec_inverse(off);
  W.diagonal() = diagonal;
  return W;
}

void finish(RecoveryResult& out, const RecoveryOptions& opts) {
  if (opts.project_psd) {
    out.W = psd_project(out.W);
    out.psd_projected = true;
  }
}

}  // namespace

NaiveEstimate naive_reconstruct(const Eigen::VectorXd& single_gammas,
                                const std::vector<PairMeasurement>& pair_gammas, int n) {
  if (n < 2) throw ParameterError("naive_reconstruct: need n >= 2");
  if (single_gammas.size() != n)
    throw StructuralError("naive_reconstruct: expected one single-qubit rate per qubit");
  const long expected = static_cast<long>(n) * (n - 1) / 2;
  if (static_cast<long>(pair_gammas.size()) != expected)
    throw StructuralError("naive_reconstruct: expected one rate per unordered pair");

  NaiveEstimate est;
  est.g_hat = single_gammas / 2.0;
  est.c_off = Eigen::MatrixXd::Zero(n, n);
  std::vector<char> seen(static_cast<std::size_t>(expected), 0);
  for (const PairMeasurement& pm : pair_gammas) {
    int i = pm.i;
    int j = pm.j;
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n || i == j)
      throw StructuralError("naive_reconstruct: pair indices out of range");
    const int k = pair_index(i, j, n);
    if (seen[static_cast<std::size_t>(k)])
      throw StructuralError("naive_reconstruct: duplicate pair record");
    seen[static_cast<std::size_t>(k)] = 1;
    const double c = pm.gamma / 4.0 - (est.g_hat[i] + est.g_hat[j]) / 2.0;
    est.c_off(i, j) = est.c_off(j, i) = c;
  }
  return est;
}

EpsilonPair set_epsilons(const Eigen::VectorXd& g, const Eigen::VectorXd& h, double delta1,
                         double delta2, double tau) {
  if (delta1 < 0 || delta2 < 0 || tau <= 0)
    throw ParameterError("set_epsilons: need delta >= 0 and tau > 0");
  if (tau * delta1 >= 0.25 || tau * delta2 >= 0.25)
    throw ParameterError("set_epsilons: validity requires tau * delta < 1/4");
  EpsilonPair eps;
  eps.eps1 = tau * delta1 * g.norm() / (1.0 - tau * delta1);
  eps.eps2 = tau * delta2 * h.norm() / (1.0 - tau * delta2);
  return eps;
}

double set_lambda(const Eigen::VectorXd& g, const Eigen::VectorXd& h, long m, int n,
                  double delta1, double delta2, const LambdaConstants& k) {
  if (n < 2) throw ParameterError("set_lambda: need n >= 2");
  if (m < 1) throw ParameterError("set_lambda: need m >= 1");
  if (delta1 < 0 || delta2 < 0) throw ParameterError("set_lambda: deltas must be >= 0");
  if (k.c_prime <= 0 || k.c0 <= 0)
    throw ParameterError("set_lambda: constants must be positive");
  if (g.size() != n) throw StructuralError("set_lambda: g length differs from n");
  if (h.size() != m) throw StructuralError("set_lambda: h length differs from m");

  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double small1 = 2.0 * std::sqrt(std::log(nd) / k.c0) * delta1;
  const double small2 = 2.0 * std::sqrt(std::log(md) / k.c0) * delta2;
  if (small1 >= 0.5 || small2 >= 0.5)
    throw ParameterError("set_lambda: smallness conditions need 2 sqrt(ln/c0) delta < 1/2");

  const double scale1 = delta1 * g.lpNorm<Eigen::Infinity>() / (1.0 - small1);
  const double scale2 = delta2 * h.lpNorm<Eigen::Infinity>() / (1.0 - small2);
  return (scale1 * 4.0 * std::sqrt(md * nd) + scale2) * 4.0 * std::sqrt(md) *
         (1.0 + std::sqrt(2.0)) * std::sqrt(std::log(nd) / k.c_prime);
}

RecoveryResult cs_sequential(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                             const SensingEnsemble& ensemble, double eps1, double eps2,
                             const RecoveryOptions& opts) {
  check_lengths(g, h, ensemble, "cs_sequential");
  if (eps1 < 0 || eps2 < 0) throw ParameterError("cs_sequential: radii must be >= 0");

  const Eigen::MatrixXd rows = sensing_matrix(ensemble);
  const Eigen::VectorXd h_shift = h - diag_sensing_matrix(ensemble) * g;
  const double radius =
      eps2 + eps1 * std::sqrt(static_cast<double>(ensemble.m()) *
                              static_cast<double>(ensemble.n));
  const ConstrainedL1Result sol = constrained_l1_solve(rows, h_shift, radius, opts.solver);

  RecoveryResult out;
  out.mode = RecoveryMode::sequential;
  out.W = assemble(g, sol.w);
  out.residual_h = sol.diag.residual_norm;
  out.residual_g = 0.0;
  out.iterations = sol.diag.iterations;
  out.solver_converged = sol.diag.converged;
  out.feasible = sol.diag.feasible;
  finish(out, opts);
  return out;
}

RecoveryResult cs_simultaneous(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                               const SensingEnsemble& ensemble, double eps1, double eps2,
                               const RecoveryOptions& opts) {
  check_lengths(g, h, ensemble, "cs_simultaneous");
  if (eps1 < 0 || eps2 < 0) throw ParameterError("cs_simultaneous: radii must be >= 0");

  const int n = ensemble.n;
  const long p = static_cast<long>(n) * (n - 1) / 2;
  PartitionedL1Program prog;
  prog.B.resize(ensemble.m(), n + p);
  prog.B.leftCols(n) = diag_sensing_matrix(ensemble);
  prog.B.rightCols(p) = sensing_matrix(ensemble);
  prog.y = h;
  prog.residual_radius = eps2;
  prog.free_dim = n;
  prog.free_center = g;
  prog.free_radius = eps1;
  const PartitionedL1Result sol = partitioned_l1_solve(prog, opts.solver);

  RecoveryResult out;
  out.mode = RecoveryMode::simultaneous;
  out.W = assemble(sol.x.head(n), sol.x.tail(p));
  out.residual_h = sol.diag.residual_norm;
  out.residual_g = (sol.x.head(n) - g).norm();
  out.iterations = sol.diag.iterations;
  out.solver_converged = sol.diag.converged;
  out.feasible = sol.diag.feasible;
  finish(out, opts);
  return out;
}

RecoveryResult cs_lasso(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                        const SensingEnsemble& ensemble, double lambda,
                        const RecoveryOptions& opts) {
  check_lengths(g, h, ensemble, "cs_lasso");
  if (lambda < 0) throw ParameterError("cs_lasso: lambda must be >= 0");

  const Eigen::MatrixXd rows = sensing_matrix(ensemble);
  const Eigen::VectorXd h_shift = h - diag_sensing_matrix(ensemble) * g;
  const LassoResult sol = lasso_solve(rows, h_shift, lambda, opts.solver);

  RecoveryResult out;
  out.mode = RecoveryMode::lasso;
  out.W = assemble(g, sol.w);
  out.residual_h = sol.diag.residual_norm;
  out.residual_g = 0.0;
  out.iterations = sol.diag.iterations;
  out.solver_converged = sol.diag.converged;
  out.feasible = true;  // penalized form has no hard constraint
  finish(out, opts);
  return out;
}

ComplexRecovery recover_complex(const Eigen::VectorXd& omega_measurements,
                                const SensingEnsemble& ensemble, double eps,
                                const RecoveryOptions& opts) {
  if (ensemble.n < 2) throw StructuralError("recover_complex: need at least two qubits");
  if (omega_measurements.size() != ensemble.m())
    throw StructuralError("recover_complex: measurement count differs from ensemble");
  if (eps < 0) throw ParameterError("recover_complex: radius must be >= 0");

  const int n = ensemble.n;
  const long p = static_cast<long>(n) * (n - 1) / 2;
  Eigen::MatrixXd rows(ensemble.m(), 2 * p);
  for (long j = 0; j < ensemble.m(); ++j)
    rows.row(j) =
        complex_probe_row(ensemble.probes[j].alpha(), ensemble.probes[j].beta());
  const ConstrainedL1Result sol =
      constrained_l1_solve(rows, omega_measurements, eps, opts.solver);

  ComplexRecovery out;
  out.diag = sol.diag;
  out.T = Eigen::MatrixXd::Zero(n, n);
  out.R = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int k = pair_index(i, j, n);
      out.T(i, j) = sol.w[k];
      out.T(j, i) = -sol.w[k];
      out.R(i, j) = out.R(j, i) = sol.w[p + k] / 2.0;
    }
  return out;
}

ModelStats stats_of(const NoiseModel& model) {
  if (model.n < 1) throw StructuralError("stats_of: empty model");
  ModelStats st;
  st.n = model.n;
  st.s = sparsity_of(model).s;
  st.diag_l2 = model.V.diagonal().norm();
  st.diag_inf = model.V.diagonal().lpNorm<Eigen::Infinity>();
  Eigen::MatrixXd off = model.V;
  off.diagonal().setZero();
  st.offdiag_fro = off.norm();
  // Best s-term approximation at the model's own support is exact.
  st.eta_s = 0.0;
  return st;
}

double naive_error_bound_sq(const ModelStats& stats, double delta1, double delta2) {
  if (stats.n < 2) throw ParameterError("naive_error_bound_sq: need n >= 2");
  if (delta1 < 0 || delta2 < 0)
    throw ParameterError("naive_error_bound_sq: deltas must be >= 0");
  const double d12 = delta1 + delta2;
  return 3.0 * (stats.n - 1) * d12 * d12 * stats.diag_l2 * stats.diag_l2 +
         6.0 * delta2 * delta2 * stats.offdiag_fro * stats.offdiag_fro;
}

double theoretical_bounds(const ModelStats& stats, double delta1, double delta2, long m,
                          BoundMode mode) {
  if (stats.n < 2) throw ParameterError("theoretical_bounds: need n >= 2");
  if (m < 1) throw ParameterError("theoretical_bounds: need m >= 1");
  if (delta1 < 0 || delta2 < 0)
    throw ParameterError("theoretical_bounds: deltas must be >= 0");

  const double n = static_cast<double>(stats.n);
  // Unit-constant scaling forms; the measurement budget m enters only through
  // the suppressed universal constants, so it is validated but not used.
  const double s = std::max<double>(static_cast<double>(stats.s), 1.0);
  const double ln_n = std::log(n);
  const double defect = stats.eta_s / std::sqrt(s);
  switch (mode) {
    case BoundMode::naive:
      return std::sqrt(n) * (delta1 + delta2) * stats.diag_l2 +
             delta2 * stats.offdiag_fro;
    case BoundMode::rip:
      return std::sqrt(n) * delta1 * stats.diag_l2 +
             delta2 * (std::sqrt(n) * stats.diag_l2 +
                       std::sqrt(2.0 * s) * stats.offdiag_fro) +
             defect;
    case BoundMode::ripless:
      return s * std::pow(ln_n, 2.5) *
                 (delta1 * stats.diag_inf * std::sqrt(s * n * ln_n) +
                  delta2 * std::sqrt(n) * stats.diag_l2 +
                  delta2 * std::sqrt(2.0 * s) * stats.offdiag_fro) +
             defect;
  }
  throw ParameterError("theoretical_bounds: unknown mode");
}

}  // namespace corrsense
