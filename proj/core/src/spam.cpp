#include "corrsense/spam.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include "corrsense/errors.hpp"
#include "corrsense/optim.hpp"
#include "corrsense/rng.hpp"
#include "nlls.hpp"

namespace corrsense {

namespace {

constexpr std::uint64_t kPrepStream = 0x70726570;  // "prep"
constexpr std::uint64_t kMeasStream = 0x6d656173;  // "meas"

long dim_of(int n) { return 1L << n; }

void check_qubits(int n) {
  if (n < 1) throw ParameterError("spam: need at least one qubit");
  if (n > kMaxSpamQubits)
    throw CapacityError("spam: dilation would act on more than 2 * " +
                        std::to_string(kMaxSpamQubits) + " qubits");
}

void check_operator(const Eigen::MatrixXcd& op, int n, const char* what) {
  if (op.rows() != dim_of(n) || op.cols() != dim_of(n))
    throw StructuralError(std::string(what) + ": dimension does not match qubit count");
  if (!op.allFinite()) throw StructuralError(std::string(what) + ": non-finite entries");
}

void check_bits(const Eigen::VectorXi& bits, int n, const char* what) {
  if (bits.size() != n)
    throw StructuralError(std::string(what) + ": bit-string length mismatch");
  for (int k = 0; k < n; ++k)
    if (bits[k] != 0 && bits[k] != 1)
      throw StructuralError(std::string(what) + ": entries must be 0 or 1");
}

long index_of(const Eigen::VectorXi& bits) {
  long idx = 0;
  for (int k = 0; k < bits.size(); ++k) idx = (idx << 1) | bits[k];
  return idx;
}

// Eigenvalues of a Hermitian matrix through the real symmetric embedding
// [[A, -B], [B, A]] of H = A + iB; every eigenvalue shows up twice.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw StructuralError("hermitian norm: matrix not square");
  if (!m.allFinite()) throw StructuralError("hermitian norm: non-finite entries");
  const Eigen::MatrixXcd h = (m + m.adjoint()) / 2.0;
  const long d = h.rows();
  Eigen::MatrixXd embed(2 * d, 2 * d);
  embed.topLeftCorner(d, d) = h.real();
  embed.bottomRightCorner(d, d) = h.real();
  embed.topRightCorner(d, d) = -h.imag();
  embed.bottomLeftCorner(d, d) = h.imag();
  return sym_eigen(embed).eigenvalues;
}

QuantumChannel make_channel(int n, double delta, Rng& rng) {
  const long d = dim_of(n);
  const long joint = d * d;  // system plus one ancilla per qubit

  QuantumChannel out;
  out.n = n;
  out.kraus.assign(static_cast<std::size_t>(d), Eigen::MatrixXcd::Zero(d, d));
  if (delta == 0.0) {
    out.kraus[0] = Eigen::MatrixXcd::Identity(d, d);
    return out;
  }

  Eigen::MatrixXcd m(joint, joint);
  for (long r = 0; r < joint; ++r)
    for (long c = 0; c < joint; ++c)
      m(r, c) = std::complex<double>(rng.uniform01(), rng.uniform01());
  const Eigen::MatrixXcd h = (m + m.adjoint()) / 2.0;
  const Eigen::MatrixXcd u = (std::complex<double>(0.0, 1.0) * delta * h).exp();

  // K_k = (I (x) <k|) U (I (x) |0>), ancillas in the low bits.
  for (long k = 0; k < d; ++k)
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) out.kraus[k](i, j) = u(i * d + k, j * d);
  return out;
}

}  // namespace

DensityMatrix DensityMatrix::from(int n, const Eigen::MatrixXcd& rho, double tol) {
  check_qubits(n);
  check_operator(rho, n, "density matrix");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw StructuralError("density matrix: not Hermitian");
  if (std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) > 1e-9)
    throw StructuralError("density matrix: trace must be 1");
  if (hermitian_eigenvalues(rho).minCoeff() < -tol)
    throw StructuralError("density matrix: negative eigenvalue");
  DensityMatrix out;
  out.n = n;
  out.rho = rho;
  return out;
}

Eigen::MatrixXcd QuantumChannel::apply(const Eigen::MatrixXcd& op) const {
  check_operator(op, n, "channel input");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(op.rows(), op.cols());
  for (const Eigen::MatrixXcd& k : kraus) out += k * op * k.adjoint();
  return out;
}

SpamChannelPair random_spam_channels(int n, double delta, std::uint64_t seed) {
  check_qubits(n);
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw ParameterError("spam: strength must be finite and nonnegative");
  SpamChannelPair out;
  out.n = n;
  out.delta = delta;
  out.seed = seed;
  Rng prep_rng = Rng::derive(seed, kPrepStream);
  Rng meas_rng = Rng::derive(seed, kMeasStream);
  out.prep = make_channel(n, delta, prep_rng);
  out.meas = make_channel(n, delta, meas_rng);
  return out;
}

Eigen::VectorXi basis_bits(long index, int n) {
  check_qubits(n);
  if (index < 0 || index >= dim_of(n))
    throw ParameterError("basis_bits: index out of range");
  Eigen::VectorXi bits(n);
  for (int k = 0; k < n; ++k) bits[k] = static_cast<int>((index >> (n - 1 - k)) & 1);
  return bits;
}

Eigen::MatrixXcd superposition_projector(const Eigen::VectorXi& a,
                                         const Eigen::VectorXi& b) {
  const int n = static_cast<int>(a.size());
  check_qubits(n);
  check_bits(a, n, "superposition");
  check_bits(b, n, "superposition");
  if (a.cwiseEqual(b).all())
    throw ParameterError("superposition: basis states must differ");
  const long d = dim_of(n);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
  psi[index_of(a)] = 1.0 / std::sqrt(2.0);
  psi[index_of(b)] = 1.0 / std::sqrt(2.0);
  return psi * psi.adjoint();
}

Eigen::MatrixXcd evolve_dephasing(const Eigen::MatrixXcd& op, const NoiseModel& model,
                                  double t) {
  check_operator(op, model.n, "evolve input");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw ParameterError("evolve: time must be finite and nonnegative");
  const long d = dim_of(model.n);
  Eigen::MatrixXcd out(d, d);
  for (long x = 0; x < d; ++x) {
    const Eigen::VectorXi bx = basis_bits(x, model.n);
    out(x, x) = op(x, x);  // populations are fixed points
    for (long y = x + 1; y < d; ++y) {
      const std::complex<double> f =
          coherence_factor(model, bx, basis_bits(y, model.n), t);
      out(x, y) = op(x, y) * f;
      out(y, x) = op(y, x) * std::conj(f);
    }
  }
  return out;
}

DensityMatrix evolve_dephasing(const DensityMatrix& state, const NoiseModel& model,
                               double t) {
  if (state.n != model.n)
    throw StructuralError("evolve: state and model disagree on qubit count");
  DensityMatrix out;
  out.n = state.n;
  out.rho = evolve_dephasing(state.rho, model, t);
  return out;
}

std::vector<double> spam_decay_curve(const NoiseModel& model,
                                     const SpamChannelPair& channels,
                                     const Eigen::VectorXi& a, const Eigen::VectorXi& b,
                                     const std::vector<double>& times) {
  if (channels.n != model.n)
    throw StructuralError("decay curve: channels and model disagree on qubit count");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || !std::isfinite(times[k]))
      throw ParameterError("decay curve: times must be finite and nonnegative");
    if (k > 0 && times[k] < times[k - 1])
      throw ParameterError("decay curve: times must be non-decreasing");
  }
  const Eigen::MatrixXcd rho0 = superposition_projector(a, b);
  const Eigen::MatrixXcd rho_t = channels.prep.apply(rho0);
  const Eigen::MatrixXcd e_t = channels.meas.apply(rho0);  // E0 coincides with rho0

  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times)
    out.push_back((e_t * evolve_dephasing(rho_t, model, t)).trace().real());
  return out;
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values) {
  const std::size_t len = times.size();
  if (values.size() != len) throw StructuralError("fit_decay: length mismatch");
  if (len < 4) throw StructuralError("fit_decay: need at least 4 samples");
  for (std::size_t k = 0; k < len; ++k) {
    if (!std::isfinite(times[k]) || !std::isfinite(values[k]))
      throw StructuralError("fit_decay: non-finite samples");
    if (times[k] < 0.0 || (k > 0 && times[k] < times[k - 1]))
      throw ParameterError("fit_decay: times must be nonnegative and non-decreasing");
  }

  DecayFit out;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));

  // Tail mean seeds the offset; the decaying part is what remains.
  const std::size_t tail = std::max<std::size_t>(1, (len + 9) / 10);
  double p_inf = 0.0;
  for (std::size_t k = len - tail; k < len; ++k) p_inf += values[k];
  p_inf /= static_cast<double>(tail);
  out.offset = p_inf;

  const double floor = 1e-12 * std::max(1.0, scale);
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < len; ++k)
    if (values[k] - p_inf > floor) {
      ts.push_back(times[k]);
      ys.push_back(values[k] - p_inf);
    }
  if (ts.size() < 4) return out;  // nothing decaying to fit

  // Log-linear seed: ln y = ln A - rate * t.
  const auto log_slope = [](const std::vector<double>& t, const std::vector<double>& y,
                            double& slope, double& intercept) {
    const double n = static_cast<double>(t.size());
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double l = std::log(y[k]);
      st += t[k];
      sl += l;
      stt += t[k] * t[k];
      stl += t[k] * l;
    }
    const double det = n * stt - st * st;
    if (det <= 0.0) {
      slope = 0.0;
      intercept = sl / n;
      return;
    }
    slope = (n * stl - st * sl) / det;
    intercept = (sl * stt - st * stl) / det;
  };

  double slope = 0.0, intercept = 0.0;
  log_slope(ts, ys, slope, intercept);
  double rate0 = -slope;
  if (!(rate0 > 0.0) || !std::isfinite(rate0)) return out;

  // Restrict to the early-time window where a single rate is expected to
  // dominate, then refit the seed there.
  std::vector<double> tw, yw;
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (ts[k] <= 2.0 / rate0) {
      tw.push_back(ts[k]);
      yw.push_back(ys[k]);
    }
  if (tw.size() < 4) {
    tw = ts;
    yw = ys;
  } else {
    log_slope(tw, yw, slope, intercept);
    if (slope < 0.0 && std::isfinite(slope)) rate0 = -slope;
  }

  Eigen::VectorXd p0(3);
  p0 << p_inf, std::exp(intercept), rate0;
  const long nr = static_cast<long>(tw.size());
  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                             Eigen::MatrixXd& jac) {
    for (long k = 0; k < nr; ++k) {
      const double e = std::exp(-p[2] * tw[static_cast<std::size_t>(k)]);
      r[k] = p[0] + p[1] * e - (yw[static_cast<std::size_t>(k)] + p_inf);
      jac(k, 0) = 1.0;
      jac(k, 1) = e;
      jac(k, 2) = -p[1] * tw[static_cast<std::size_t>(k)] * e;
    }
  };
  const detail::NllsResult fit = detail::levenberg_marquardt(residuals, p0, nr);

  out.rms = fit.rms;
  if (!fit.converged || !(fit.params[2] > 0.0) || !fit.params.allFinite()) return out;
  out.offset = fit.params[0];
  out.amplitude = fit.params[1];
  out.rate = fit.params[2];
  out.converged = true;
  return out;
}

double trace_norm(const Eigen::MatrixXcd& m) {
  return hermitian_eigenvalues(m).cwiseAbs().sum() / 2.0;
}

double operator_norm(const Eigen::MatrixXcd& m) {
  const Eigen::VectorXd eigs = hermitian_eigenvalues(m);
  return eigs.size() == 0 ? 0.0 : eigs.cwiseAbs().maxCoeff();
}

SpamNorms spam_perturbation_norms(const SpamChannelPair& channels,
                                  const Eigen::MatrixXcd& rho0,
                                  const Eigen::MatrixXcd& e0) {
  check_operator(rho0, channels.n, "perturbation norms");
  check_operator(e0, channels.n, "perturbation norms");
  SpamNorms out;
  out.eps_s = trace_norm(channels.prep.apply(rho0) - rho0);
  out.eps_m = operator_norm(channels.meas.apply(e0) - e0);
  return out;
}

}  // namespace corrsense
