#include "corrsense/spectroscopy.hpp"

#include <algorithm>
#include <cmath>

#include "nlls.hpp"

namespace corrsense {

namespace {

// ceil with a relative guard: values that sit within 1e-12 of an integer
// (formula results computed in floating point) round to that integer
// instead of the one above.
long guarded_ceil(double x) {
  const double y = std::ceil(x * (1.0 - 1e-12));
  return static_cast<long>(y);
}

}  // namespace

ShotCounts sample_ramsey(double gamma, double omega, double t, long n_trials, Rng& rng) {
  if (gamma < 0) throw ParameterError("sample_ramsey: gamma must be nonnegative");
  if (t < 0) throw ParameterError("sample_ramsey: t must be nonnegative");
  if (n_trials < 1) throw ParameterError("sample_ramsey: need at least one trial");
  const double p = std::clamp(0.5 * (1.0 + std::exp(-gamma * t) * std::cos(omega * t)), 0.0, 1.0);
  ShotCounts counts;
  counts.t = t;
  counts.n_plus = rng.binomial(n_trials, p);
  counts.n_minus = n_trials - counts.n_plus;
  return counts;
}

std::optional<DecayEstimate> estimate_gamma(const ShotCounts& counts) {
  if (counts.t <= 0) throw ParameterError("estimate_gamma: t must be positive");
  if (counts.n_plus < 0 || counts.n_minus < 0 || counts.n_trials() < 1)
    throw StructuralError("estimate_gamma: invalid shot counts");
  const double delta = static_cast<double>(counts.n_plus - counts.n_minus) /
                       static_cast<double>(counts.n_trials());
  if (delta <= 0.0) return std::nullopt;
  DecayEstimate est;
  est.gamma_hat = -std::log(delta) / counts.t;
  est.t_used = counts.t;
  est.n_trials = counts.n_trials();
  est.delta_observed = delta;
  return est;
}

long trials_for(double delta, double epsilon) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("trials_for: delta outside (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("trials_for: epsilon outside (0,1)");
  const double x = (2.0 / (delta * delta)) * std::log(2.0 / epsilon);
  return std::max<long>(1, guarded_ceil(x));
}

long walk_steps_for(double h, double eta, const WalkConstants& wc) {
  if (h <= 0) throw ParameterError("walk_steps_for: h must be positive");
  if (eta < 0) throw ParameterError("walk_steps_for: eta must be nonnegative");
  if (wc.mu <= 0) throw ParameterError("walk_steps_for: mu must be positive");
  return std::max<long>(1, guarded_ceil(h / wc.mu + eta));
}

long walk_trials_for(double delta, double epsilon, const WalkConstants& wc) {
  if (!(delta > 0.0)) throw ParameterError("walk_trials_for: delta must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("walk_trials_for: epsilon outside (0,1)");
  if (wc.c <= 0 || wc.K <= 0) throw ParameterError("walk_trials_for: constants must be positive");
  const double ratio = std::max(wc.K / delta, (wc.K * wc.K) / (delta * delta));
  const double x = (1.0 / wc.c) * ratio * std::log(2.0 / epsilon);
  return std::max<long>(1, guarded_ceil(x));
}

long walk_endpoint(const RamseySampler& sampler, double tau0, long n_steps, long s_clamp,
                   Rng& rng) {
  if (tau0 <= 0) throw ParameterError("walk_endpoint: tau0 must be positive");
  if (n_steps < 1) throw ParameterError("walk_endpoint: need at least one step");
  if (s_clamp < 1) throw ParameterError("walk_endpoint: clamp must be positive");
  long s = 0;
  for (long k = 0; k < n_steps; ++k) {
    const double t = std::ldexp(tau0, static_cast<int>(s));
    const bool plus = sampler(t, rng);
    if (plus) {
      if (rng.bernoulli(kWalkUpProbability)) ++s;
    } else {
      --s;
    }
    s = std::clamp(s, -s_clamp, s_clamp);
  }
  return s;
}

double choose_time(const RamseySampler& sampler, double tau0, double h, double eta,
                   long n_trials, Rng& rng, const WalkConstants& wc) {
  if (tau0 <= 0) throw ParameterError("choose_time: tau0 must be positive");
  if (n_trials < 1) throw ParameterError("choose_time: need at least one walk");
  const long n_steps = walk_steps_for(h, eta, wc);
  const long s_clamp = static_cast<long>(std::ceil(h)) + 64;
  double xi_sum = 0.0;
  for (long trial = 0; trial < n_trials; ++trial) {
    xi_sum += static_cast<double>(walk_endpoint(sampler, tau0, n_steps, s_clamp, rng));
  }
  const double xi = xi_sum / static_cast<double>(n_trials);
  return tau0 * std::exp2(xi);
}

ComplexRateFit estimate_complex_rates(const std::vector<ComplexSample>& samples) {
  if (samples.size() < 6)
    throw StructuralError("estimate_complex_rates: need at least 6 time points");
  const long n = static_cast<long>(samples.size());
  for (const auto& s : samples)
    if (s.t < 0) throw ParameterError("estimate_complex_rates: negative time");

  // Coherence samples: real part from the standard basis, imaginary part
  // from the quarter-rotated basis.
  Eigen::VectorXd ts(n), re(n), im(n);
  for (long k = 0; k < n; ++k) {
    ts[k] = samples[k].t;
    re[k] = 2.0 * samples[k].p_plus - 1.0;
    im[k] = 2.0 * samples[k].p_y - 1.0;
  }

  // Initial decay rate: regression of log magnitude against t.
  double sw = 0, swt = 0, swtt = 0, swy = 0, swty = 0;
  for (long k = 0; k < n; ++k) {
    const double mag = std::hypot(re[k], im[k]);
    if (mag <= 1e-12) continue;
    const double y = std::log(mag);
    sw += 1;
    swt += ts[k];
    swtt += ts[k] * ts[k];
    swy += y;
    swty += ts[k] * y;
  }
  // Fewer than two samples with measurable contrast: the record carries no
  // rate information, and the refinement below would chase gamma to
  // infinity. Report the failure instead.
  if (sw < 2) {
    ComplexRateFit out;
    out.converged = false;
    out.residual = std::sqrt((re.squaredNorm() + im.squaredNorm()) /
                             static_cast<double>(2 * n));
    return out;
  }

  double gamma0 = 0.0;
  const double det = sw * swtt - swt * swt;
  if (std::abs(det) > 1e-12) gamma0 = -(sw * swty - swt * swy) / det;
  gamma0 = std::max(gamma0, 0.0);

  // Initial frequency: slope of the unwrapped phase (valid while successive
  // samples advance by less than pi).
  double omega0 = 0.0;
  {
    double sphi_t = 0, st_t = 0;
    double prev_phi = 0.0, unwrapped = 0.0;
    bool have_prev = false;
    for (long k = 0; k < n; ++k) {
      if (std::hypot(re[k], im[k]) <= 1e-12) continue;
      const double phi = std::atan2(im[k], re[k]);
      if (have_prev) {
        double d = phi - prev_phi;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        unwrapped += d;
      } else {
        // Anchor at the principal phase of the first usable sample; exact
        // whenever |omega| t_1 < pi, and only a seed otherwise.
        unwrapped = phi;
      }
      prev_phi = phi;
      have_prev = true;
      sphi_t += unwrapped * ts[k];
      st_t += ts[k] * ts[k];
    }
    if (st_t > 1e-12) omega0 = sphi_t / st_t;
  }

  const auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const double g = p[0], w = p[1];
    for (long k = 0; k < n; ++k) {
      const double e = std::exp(-g * ts[k]);
      const double c = std::cos(w * ts[k]);
      const double s = std::sin(w * ts[k]);
      r[k] = e * c - re[k];
      r[n + k] = e * s - im[k];
      J(k, 0) = -ts[k] * e * c;
      J(k, 1) = -ts[k] * e * s;
      J(n + k, 0) = -ts[k] * e * s;
      J(n + k, 1) = ts[k] * e * c;
    }
  };

  Eigen::VectorXd p0(2);
  p0 << gamma0, omega0;
  const detail::NllsResult fit = detail::levenberg_marquardt(residuals, p0, 2 * n);

  ComplexRateFit out;
  out.gamma = fit.params[0];
  out.omega = fit.params[1];
  out.converged = fit.converged;
  out.iterations = fit.iterations;
  out.residual = fit.rms;
  return out;
}

}  // namespace corrsense
