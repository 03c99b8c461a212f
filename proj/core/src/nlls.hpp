#pragma once

// Internal dense Levenberg-Marquardt used by the decay and quadrature fits.
// Small fixed-size problems only (2-3 parameters, tens of residuals).

#include <Eigen/Dense>
#include <functional>

namespace corrsense::detail {

struct NllsResult {
  Eigen::VectorXd params;
  bool converged = false;
  long iterations = 0;
  double rms = 0.0;
};

// fn(p, r, J) fills the residual vector and its Jacobian at p.
using ResidualFn =
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>;

inline NllsResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p0,
                                      long n_residuals, long max_iterations = 400,
                                      double step_tol = 1e-13) {
  const Eigen::Index d = p0.size();
  Eigen::VectorXd r(n_residuals);
  Eigen::MatrixXd J(n_residuals, d);
  fn(p0, r, J);
  double cost = r.squaredNorm();
  double mu = 1e-3;

  NllsResult out;
  long k = 0;
  for (; k < max_iterations; ++k) {
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + cost)) {
      out.converged = true;
      break;
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      // Marquardt scaling with a floor so zero-curvature directions move too.
      for (Eigen::Index i = 0; i < d; ++i) A(i, i) += mu * std::max(JtJ(i, i), 1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd p_try = p0 + step;
      Eigen::VectorXd r_try(n_residuals);
      Eigen::MatrixXd J_try(n_residuals, d);
      fn(p_try, r_try, J_try);
      const double cost_try = r_try.squaredNorm();
      if (cost_try <= cost) {
        const bool tiny = step.norm() <= step_tol * (1.0 + p0.norm());
        p0 = p_try;
        r.swap(r_try);
        J.swap(J_try);
        const double drop = cost - cost_try;
        cost = cost_try;
        mu = std::max(mu / 3.0, 1e-12);
        stepped = true;
        if (tiny || drop <= 1e-15 * (1.0 + cost)) {
          out.converged = true;
        }
        break;
      }
      mu *= 10.0;
      if (mu > 1e12) break;
    }
    if (out.converged || !stepped) break;
  }
  out.params = std::move(p0);
  out.iterations = k;
  out.rms = std::sqrt(cost / static_cast<double>(n_residuals));
  return out;
}

}  // namespace corrsense::detail
