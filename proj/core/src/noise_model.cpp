#include "corrsense/noise_model.hpp"

#include <cmath>
#include <numeric>

#include "corrsense/optim.hpp"
#include "corrsense/rng.hpp"

namespace corrsense {

namespace detail {

Eigen::VectorXi signs_from_bits(const Eigen::VectorXi& bits) {
  Eigen::VectorXi s(bits.size());
  for (Eigen::Index i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0 && bits[i] != 1)
      throw StructuralError("bit-vector entries must be 0 or 1");
    s[i] = 1 - 2 * bits[i];
  }
  return s;
}

void require_square(const Eigen::MatrixXd& M, int n, const char* name) {
  if (M.rows() != n || M.cols() != n)
    throw StructuralError(std::string(name) + ": expected " + std::to_string(n) + "x" +
                          std::to_string(n) + ", got " + std::to_string(M.rows()) + "x" +
                          std::to_string(M.cols()));
}

}  // namespace detail

NoiseModel NoiseModel::real(Eigen::MatrixXd v) {
  NoiseModel m;
  m.n = static_cast<int>(v.rows());
  detail::require_square(v, m.n, "V");
  m.V = std::move(v);
  m.T = Eigen::MatrixXd::Zero(m.n, m.n);
  m.R = Eigen::MatrixXd::Zero(m.n, m.n);
  return m;
}

bool NoiseModel::is_real(double tol) const {
  return T.cwiseAbs().maxCoeff() <= tol && R.cwiseAbs().maxCoeff() <= tol;
}

SparsityProfile sparsity_of(const NoiseModel& model, double tol) {
  SparsityProfile p;
  for (int i = 0; i < model.n; ++i)
    for (int j = i + 1; j < model.n; ++j) {
      const double mag = std::hypot(model.V(i, j), model.T(i, j));
      if (mag > tol) p.support.emplace_back(i, j);
    }
  p.s = static_cast<int>(p.support.size());
  return p;
}

namespace {

// Minimum eigenvalue of the Hermitian matrix V + iT through its real
// symmetric embedding [[V, -T], [T, V]] (eigenvalues doubled in multiplicity).
double min_eigenvalue_of_pair(const Eigen::MatrixXd& V, const Eigen::MatrixXd& T) {
  const int n = static_cast<int>(V.rows());
  if (T.cwiseAbs().maxCoeff() == 0.0) {
    return sym_eigen((V + V.transpose()) / 2.0).eigenvalues.minCoeff();
  }
  Eigen::MatrixXd M(2 * n, 2 * n);
  M.topLeftCorner(n, n) = V;
  M.topRightCorner(n, n) = -T;
  M.bottomLeftCorner(n, n) = T;
  M.bottomRightCorner(n, n) = V;
  // Hermitian part; exact when V is symmetric and T is skew, and keeps the
  // report well-defined (instead of throwing) when they are not.
  const Eigen::MatrixXd S = (M + M.transpose()) / 2.0;
  return sym_eigen(S).eigenvalues.minCoeff();
}

}  // namespace

ValidationReport validate(const NoiseModel& model, double tol_psd) {
  if (tol_psd < 0) throw ParameterError("validate: tol_psd must be nonnegative");
  if (model.n <= 0) throw StructuralError("validate: model has no qubits");
  detail::require_square(model.V, model.n, "V");
  detail::require_square(model.T, model.n, "T");
  detail::require_square(model.R, model.n, "R");

  ValidationReport rep;
  const double scale_v = std::max(1.0, model.V.cwiseAbs().maxCoeff());
  const double scale_t = std::max(1.0, model.T.cwiseAbs().maxCoeff());
  const double scale_r = std::max(1.0, model.R.cwiseAbs().maxCoeff());
  const double tol_sym = 1e-12;

  rep.v_symmetric = (model.V - model.V.transpose()).cwiseAbs().maxCoeff() <= tol_sym * scale_v;
  rep.t_skew_symmetric =
      (model.T + model.T.transpose()).cwiseAbs().maxCoeff() <= tol_sym * scale_t;
  rep.r_symmetric = (model.R - model.R.transpose()).cwiseAbs().maxCoeff() <= tol_sym * scale_r;
  rep.diag_nonnegative = (model.V.diagonal().array() >= 0.0).all();
  rep.min_eigenvalue = min_eigenvalue_of_pair(model.V, model.T);
  rep.psd = rep.min_eigenvalue >= -tol_psd;
  rep.sparsity = sparsity_of(model);

  if (!rep.v_symmetric) rep.violations.push_back("V is not symmetric");
  if (!rep.t_skew_symmetric) rep.violations.push_back("T is not skew-symmetric");
  if (!rep.r_symmetric) rep.violations.push_back("R is not symmetric");
  if (!rep.diag_nonnegative) rep.violations.push_back("diag(V) has negative entries");
  if (!rep.psd) rep.violations.push_back("V + iT is not positive semidefinite");
  return rep;
}

double decay_rate(const NoiseModel& model, const Eigen::VectorXi& r) {
  if (r.size() != model.n) throw StructuralError("decay_rate: r has wrong length");
  if ((r.array().abs() > 1).any())
    throw ParameterError("decay_rate: r entries must lie in {-1, 0, 1}");
  const Eigen::VectorXd rd = r.cast<double>();
  return 2.0 * rd.dot(model.V * rd);
}

ComplexRates complex_rates(const NoiseModel& model, const Eigen::VectorXi& alpha,
                           const Eigen::VectorXi& beta) {
  if (alpha.size() != model.n || beta.size() != model.n)
    throw StructuralError("complex_rates: sign vectors have wrong length");
  if ((alpha.array().abs() != 1).any() || (beta.array().abs() != 1).any())
    throw ParameterError("complex_rates: sign vectors must have entries +-1");
  const Eigen::VectorXd a = alpha.cast<double>();
  const Eigen::VectorXd b = beta.cast<double>();
  const Eigen::VectorXd d = a - b;
  ComplexRates out;
  out.gamma = 0.5 * d.dot(model.V * d);
  out.omega = -(a.dot(model.R * a) - b.dot(model.R * b)) +
              0.5 * (a.dot(model.T * b) - b.dot(model.T * a));
  return out;
}

std::complex<double> coherence_factor(const NoiseModel& model, const Eigen::VectorXi& a,
                                      const Eigen::VectorXi& b, double t) {
  if (t < 0) throw ParameterError("coherence_factor: t must be nonnegative");
  const ComplexRates rates =
      complex_rates(model, detail::signs_from_bits(a), detail::signs_from_bits(b));
  return std::exp(std::complex<double>(-rates.gamma * t, rates.omega * t));
}

NoiseModel random_sparse_model(int n, int s_pairs, std::uint64_t seed) {
  if (n < 1) throw ParameterError("random_sparse_model: n must be positive");
  if (s_pairs < 0 || s_pairs > n - 1)
    throw ParameterError("random_sparse_model: s_pairs must lie in [0, n-1]");

  // Chain pattern: rate 2 everywhere on the diagonal, 1/2 on the first
  // s_pairs adjacent pairs; strictly diagonally dominant, hence PSD.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = Rng::derive(seed, 0x6d6f64);
  rng.shuffle(perm);

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) V(perm[i], perm[i]) = 2.0;
  for (int i = 0; i < s_pairs; ++i) {
    V(perm[i], perm[i + 1]) = 0.5;
    V(perm[i + 1], perm[i]) = 0.5;
  }
  return NoiseModel::real(std::move(V));
}

std::pair<int, int> pair_from_index(int k, int n) {
  if (k < 0 || k >= n * (n - 1) / 2) throw ParameterError("pair_from_index: out of range");
  int i = 0;
  int row_len = n - 1;
  while (k >= row_len) {
    k -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + k};
}

Eigen::VectorXd uvec(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw StructuralError("uvec: matrix must be square");
  const int n = static_cast<int>(M.rows());
  Eigen::VectorXd v(n * (n - 1) / 2);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) v[k++] = M(i, j);
  return v;
}

Eigen::MatrixXd uvec_inverse(const Eigen::VectorXd& v) {
  // Invert d = n(n-1)/2.
  const double len = static_cast<double>(v.size());
  const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * len)) / 2.0));
  if (n * (n - 1) / 2 != v.size())
    throw StructuralError("uvec_inverse: length is not a triangular number");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      M(i, j) = v[k];
      M(j, i) = v[k];
      ++k;
    }
  return M;
}

Eigen::VectorXd diag_of(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw StructuralError("diag_of: matrix must be square");
  return M.diagonal();
}

Eigen::MatrixXd off_diag_of(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw StructuralError("off_diag_of: matrix must be square");
  Eigen::MatrixXd out = M;
  out.diagonal().setZero();
  return out;
}

}  // namespace corrsense
