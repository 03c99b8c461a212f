#include "corrsense/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace corrsense {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double lambda) {
  if (lambda < 0) throw ParameterError("soft_threshold: lambda must be nonnegative");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - lambda;
    out[i] = mag > 0 ? (x[i] > 0 ? mag : -mag) : 0.0;
  }
  return out;
}

namespace {

void check_options(const SolverOptions& opts) {
  if (opts.max_iterations < 1) throw ParameterError("solver: max_iterations must be >= 1");
  if (opts.tol_abs <= 0 || opts.tol_rel <= 0)
    throw ParameterError("solver: tolerances must be positive");
  if (opts.rho0 <= 0) throw ParameterError("solver: rho0 must be positive");
}

// Largest eigenvalue of Q^T Q by power iteration (deterministic start).
double largest_gram_eigenvalue(const Eigen::MatrixXd& Q) {
  const Eigen::Index d = Q.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  double lam = 0.0;
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd w = Q.transpose() * (Q * v);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    const double prev = lam;
    lam = nrm;  // Rayleigh quotient of the normalized previous iterate
    v = w / nrm;
    if (it > 0 && std::abs(lam - prev) <= 1e-6 * lam) break;
  }
  return lam;
}

Eigen::VectorXd ball_project(const Eigen::VectorXd& p, const Eigen::VectorXd& center,
                             double radius) {
  if (radius <= 0.0) return center;
  const Eigen::VectorXd d = p - center;
  const double nrm = d.norm();
  if (nrm <= radius) return p;
  return center + d * (radius / nrm);
}

double lasso_objective(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x, double lambda, double* resid_norm) {
  const Eigen::VectorXd r = Q * x - y;
  if (resid_norm) *resid_norm = r.norm();
  return 0.5 * r.squaredNorm() + lambda * x.lpNorm<1>();
}

double lasso_kkt_residual(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& x, double lambda) {
  const Eigen::VectorXd g = Q.transpose() * (Q * x - y);
  double viol = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0)
      viol = std::max(viol, std::max(std::abs(g[i]) - lambda, 0.0));
    else
      viol = std::max(viol, std::abs(g[i] + (x[i] > 0 ? lambda : -lambda)));
  }
  return viol;
}

}  // namespace

LassoResult lasso_solve(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y, double lambda,
                        const SolverOptions& opts) {
  check_options(opts);
  if (lambda < 0) throw ParameterError("lasso_solve: lambda must be nonnegative");
  if (Q.rows() != y.size()) throw StructuralError("lasso_solve: Q and y disagree on m");
  const Eigen::Index d = Q.cols();

  LassoResult res;
  const double L = largest_gram_eigenvalue(Q);
  if (L == 0.0) {
    // Zero operator: the objective reduces to lambda * ||w||_1 (+ const).
    res.w = Eigen::VectorXd::Zero(d);
    res.diag.converged = true;
    res.diag.objective = 0.5 * y.squaredNorm();
    res.diag.residual_norm = y.norm();
    return res;
  }
  const double step = 1.0 / (opts.step_safety * L);

  Eigen::VectorXd x;
  if (opts.warm_start) {
    if (opts.warm_start->size() != d) throw StructuralError("lasso_solve: warm start length");
    x = *opts.warm_start;
  } else {
    x = Eigen::VectorXd::Zero(d);
  }
  Eigen::VectorXd z = x;
  double theta = 1.0;
  double obj = lasso_objective(Q, y, x, lambda, nullptr);
  const double kkt_tol =
      std::max(opts.tol_abs, opts.tol_rel * std::max(lambda, (Q.transpose() * y).cwiseAbs().maxCoeff()));

  SolverDiagnostics& diag = res.diag;
  long k = 0;
  for (; k < opts.max_iterations; ++k) {
    Eigen::VectorXd grad = Q.transpose() * (Q * z - y);
    Eigen::VectorXd x_new = soft_threshold(z - step * grad, step * lambda);
    double obj_new = lasso_objective(Q, y, x_new, lambda, nullptr);
    if (obj_new > obj) {
      // Monotone restart: discard momentum, take a plain proximal step.
      grad = Q.transpose() * (Q * x - y);
      x_new = soft_threshold(x - step * grad, step * lambda);
      obj_new = lasso_objective(Q, y, x_new, lambda, nullptr);
      theta = 1.0;
      if (obj_new > obj) {  // fully stalled at numerical precision
        x_new = x;
        obj_new = obj;
      }
    }
    const double theta_new = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
    z = x_new + ((theta - 1.0) / theta_new) * (x_new - x);
    theta = theta_new;
    x = x_new;
    obj = obj_new;

    if (k % 10 == 9 || k == opts.max_iterations - 1) {
      const double viol = lasso_kkt_residual(Q, y, x, lambda);
      if (viol <= kkt_tol) {
        diag.converged = true;
        ++k;
        break;
      }
    }
  }

  diag.iterations = k;
  diag.kkt_residual = lasso_kkt_residual(Q, y, x, lambda);
  diag.objective = lasso_objective(Q, y, x, lambda, &diag.residual_norm);
  diag.feasible = true;
  res.w = std::move(x);
  return res;
}

namespace {

// Shared alternating-direction engine for
//   minimize ||x_l1||_1
//   s.t.     ||B x - y|| <= residual_radius,
//            ||x_free - free_center|| <= free_radius   (first free_dim coords)
// written as  [I; B] x = [z; v]  with z split into the ball/soft blocks.
// The x-update system (I + B^T B) is penalty-independent because both
// consensus blocks share the same rho, so penalty rebalancing is free.
PartitionedL1Result admm_l1(const Eigen::MatrixXd& B, const Eigen::VectorXd& y, double radius,
                            int free_dim, const Eigen::VectorXd& free_center, double free_radius,
                            const SolverOptions& opts) {
  check_options(opts);
  const Eigen::Index m = B.rows();
  const Eigen::Index D = B.cols();
  if (y.size() != m) throw StructuralError("l1 solver: B and y disagree on m");
  if (radius < 0 || free_radius < 0) throw ParameterError("l1 solver: radius must be >= 0");
  if (free_dim < 0 || free_dim > D) throw ParameterError("l1 solver: free_dim out of range");
  if (free_dim > 0 && free_center.size() != free_dim)
    throw StructuralError("l1 solver: free_center length");

  // Factor the x-update system once. Under-determined rows go through the
  // m x m identity-plus-Gram form; otherwise factor the D x D system.
  const bool woodbury = m <= D;
  Eigen::MatrixXd G;
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (woodbury) {
    if (opts.gram) {
      if (opts.gram->rows() != m || opts.gram->cols() != m)
        throw StructuralError("l1 solver: supplied Gram matrix has wrong size");
      G = *opts.gram;
    } else {
      G.noalias() = B * B.transpose();
    }
    llt.compute(Eigen::MatrixXd::Identity(m, m) + G);
  } else {
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(D, D);
    H.noalias() += B.transpose() * B;
    llt.compute(H);
  }
  if (llt.info() != Eigen::Success) throw SolverError("l1 solver: factorization failed");

  Eigen::VectorXd x;
  if (opts.warm_start) {
    if (opts.warm_start->size() != D) throw StructuralError("l1 solver: warm start length");
    x = *opts.warm_start;
  } else {
    x = Eigen::VectorXd::Zero(D);
  }
  Eigen::VectorXd z = x;
  Eigen::VectorXd Bx = B * x;
  Eigen::VectorXd v = ball_project(Bx, y, radius);
  Eigen::VectorXd ux = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd uv = Eigen::VectorXd::Zero(m);

  double rho = opts.rho0;
  double r_pri = 0.0, r_dual = 0.0;
  const int check_every = 5;
  const int rho_every = 25;

  PartitionedL1Result res;
  SolverDiagnostics& diag = res.diag;
  long k = 0;
  for (; k < opts.max_iterations; ++k) {
    const bool checking = (k % check_every == check_every - 1);
    Eigen::VectorXd z_prev, v_prev;
    if (checking) {
      z_prev = z;
      v_prev = v;
    }

    // x-update: (I + B^T B) x = (z - ux) + B^T (v - uv)
    const Eigen::VectorXd a = z - ux;
    const Eigen::VectorXd c = v - uv;
    if (woodbury) {
      Eigen::VectorXd Ba;
      Ba.noalias() = B * a;
      Eigen::VectorXd rhs = Ba;
      rhs.noalias() += G * c;
      const Eigen::VectorXd ysol = llt.solve(rhs);
      const Eigen::VectorXd cm = c - ysol;
      x = a;
      x.noalias() += B.transpose() * cm;
      Bx = Ba;
      Bx.noalias() += G * cm;
    } else {
      Eigen::VectorXd rhs = a;
      rhs.noalias() += B.transpose() * c;
      x = llt.solve(rhs);
      Bx.noalias() = B * x;
    }

    // z-update: ball projection on the free block, shrinkage on the l1 block.
    const Eigen::VectorXd w1 = x + ux;
    if (free_dim > 0)
      z.head(free_dim) = ball_project(w1.head(free_dim), free_center, free_radius);
    z.tail(D - free_dim) = soft_threshold(w1.tail(D - free_dim), 1.0 / rho);

    // v-update: projection of the data residual onto its ball.
    v = ball_project(Bx + uv, y, radius);

    ux += x - z;
    uv += Bx - v;

    if (checking) {
      r_pri = std::sqrt((x - z).squaredNorm() + (Bx - v).squaredNorm());
      Eigen::VectorXd dz = (z - z_prev);
      dz.noalias() += B.transpose() * (v - v_prev);
      r_dual = rho * dz.norm();
      const double pri_scale =
          std::max(std::sqrt(x.squaredNorm() + Bx.squaredNorm()),
                   std::sqrt(z.squaredNorm() + v.squaredNorm()));
      Eigen::VectorXd du = ux;
      du.noalias() += B.transpose() * uv;
      const double eps_pri =
          std::sqrt(static_cast<double>(D + m)) * opts.tol_abs + opts.tol_rel * pri_scale;
      const double eps_dual = std::sqrt(static_cast<double>(D)) * opts.tol_abs +
                              opts.tol_rel * rho * du.norm();
      if (r_pri <= eps_pri && r_dual <= eps_dual) {
        diag.converged = true;
        ++k;
        break;
      }
      if (k % rho_every == rho_every - 1) {
        if (r_pri > 10.0 * r_dual) {
          rho *= 2.0;
          ux /= 2.0;
          uv /= 2.0;
        } else if (r_dual > 10.0 * r_pri) {
          rho /= 2.0;
          ux *= 2.0;
          uv *= 2.0;
        }
      }
    }
  }

  // Return the consensus iterate: its l1 block carries exact zeros and its
  // free block is exactly ball-feasible.
  diag.iterations = k;
  diag.primal_residual = r_pri;
  diag.dual_residual = r_dual;
  diag.objective = z.tail(D - free_dim).lpNorm<1>();
  diag.residual_norm = (B * z - y).norm();
  const double slack =
      10.0 * (std::sqrt(static_cast<double>(m)) * opts.tol_abs + opts.tol_rel * std::max(1.0, y.norm()));
  diag.feasible = diag.residual_norm <= radius + slack;
  res.x = std::move(z);
  return res;
}

}  // namespace

ConstrainedL1Result constrained_l1_solve(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                         double eps, const SolverOptions& opts) {
  PartitionedL1Result r = admm_l1(Q, y, eps, 0, Eigen::VectorXd(), 0.0, opts);
  return ConstrainedL1Result{std::move(r.x), r.diag};
}

PartitionedL1Result partitioned_l1_solve(const PartitionedL1Program& prog,
                                         const SolverOptions& opts) {
  return admm_l1(prog.B, prog.y, prog.residual_radius, prog.free_dim, prog.free_center,
                 prog.free_radius, opts);
}

EigenDecomposition sym_eigen(const Eigen::MatrixXd& M, double symmetry_tol) {
  if (M.rows() != M.cols()) throw StructuralError("sym_eigen: matrix must be square");
  const int d = static_cast<int>(M.rows());
  if (d == 0) throw StructuralError("sym_eigen: empty matrix");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale)
    throw StructuralError("sym_eigen: matrix is not symmetric within tolerance");

  Eigen::MatrixXd A = (M + M.transpose()) / 2.0;
  Eigen::MatrixXd U = Eigen::MatrixXd::Identity(d, d);
  const double fro = A.norm();
  const double stop = 1e-12 * fro;

  if (fro > 0.0) {
    bool done = false;
    for (int sweep = 0; sweep < 100 && !done; ++sweep) {
      double off2 = 0.0;
      for (int p = 0; p < d; ++p)
        for (int q = p + 1; q < d; ++q) off2 += 2.0 * A(p, q) * A(p, q);
      if (std::sqrt(off2) <= stop) {
        done = true;
        break;
      }
      for (int p = 0; p < d; ++p) {
        for (int q = p + 1; q < d; ++q) {
          const double apq = A(p, q);
          if (std::abs(apq) <= stop / (static_cast<double>(d) * d)) continue;
          const double app = A(p, p);
          const double aqq = A(q, q);
          const double tau = (aqq - app) / (2.0 * apq);
          const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          for (int k = 0; k < d; ++k) {
            if (k == p || k == q) continue;
            const double akp = A(k, p);
            const double akq = A(k, q);
            A(k, p) = A(p, k) = c * akp - s * akq;
            A(k, q) = A(q, k) = s * akp + c * akq;
          }
          A(p, p) = app - t * apq;
          A(q, q) = aqq + t * apq;
          A(p, q) = A(q, p) = 0.0;
          for (int k = 0; k < d; ++k) {
            const double ukp = U(k, p);
            const double ukq = U(k, q);
            U(k, p) = c * ukp - s * ukq;
            U(k, q) = s * ukp + c * ukq;
          }
        }
      }
    }
    if (!done) {
      double off2 = 0.0;
      for (int p = 0; p < d; ++p)
        for (int q = p + 1; q < d; ++q) off2 += 2.0 * A(p, q) * A(p, q);
      if (std::sqrt(off2) > stop)
        throw SolverError("sym_eigen: Jacobi sweeps failed to converge");
    }
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return A(i, i) > A(j, j); });

  EigenDecomposition out;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(d, d);
  for (int i = 0; i < d; ++i) {
    out.eigenvalues[i] = A(order[i], order[i]);
    out.eigenvectors.col(i) = U.col(order[i]);
  }
  return out;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M) {
  const EigenDecomposition ed = sym_eigen(M);
  const double lmax = ed.eigenvalues.cwiseAbs().maxCoeff();
  if (ed.eigenvalues.minCoeff() >= -1e-14 * std::max(1.0, lmax)) return M;
  const Eigen::VectorXd lp = ed.eigenvalues.cwiseMax(0.0);
  Eigen::MatrixXd P = ed.eigenvectors * lp.asDiagonal() * ed.eigenvectors.transpose();
  return (P + P.transpose()) / 2.0;
}

}  // namespace corrsense
