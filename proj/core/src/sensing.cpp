#include "corrsense/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

// Stream tags: every stochastic sub-task gets its own derived seed, so a
// campaign's contents do not depend on the order entries are simulated in.
constexpr std::uint64_t kProbeStream = 0x70726f62;  // ensemble probe draws
constexpr std::uint64_t kDiagStream = 0x64696167;   // single-qubit estimates
constexpr std::uint64_t kPairStream = 0x70616972;   // ensemble-probe estimates
constexpr std::uint64_t kGaussStream = 0x67617573;  // additive noise on h

void check_ensemble(const SensingEnsemble& ensemble) {
  if (ensemble.n < 1) throw StructuralError("sensing: ensemble has n < 1");
  for (const Probe& p : ensemble.probes) {
    if (p.a.size() != ensemble.n || p.b.size() != ensemble.n)
      throw StructuralError("sensing: probe bitstring length differs from ensemble n");
    for (long i = 0; i < p.a.size(); ++i) {
      const bool ok = (p.a[i] == 0 || p.a[i] == 1) && (p.b[i] == 0 || p.b[i] == 1);
      if (!ok) throw StructuralError("sensing: probe bitstrings must be 0/1");
    }
  }
}

void check_model_matches(const NoiseModel& model, const SensingEnsemble& ensemble,
                         const char* who) {
  if (model.n != ensemble.n)
    throw StructuralError(std::string(who) + ": model size differs from ensemble");
}

void check_noise_spec(const NoiseSpec& spec) {
  const auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
  switch (spec.mode) {
    case NoiseMode::exact:
      return;
    case NoiseMode::gaussian:
      if (!(spec.sigma_eps >= 0.0) || !std::isfinite(spec.sigma_eps))
        throw ParameterError("simulate_campaign: sigma_eps must be finite and >= 0");
      return;
    case NoiseMode::shot:
      if (!in_unit(spec.delta1) || !in_unit(spec.delta2))
        throw ParameterError("simulate_campaign: delta1, delta2 must lie in (0,1)");
      if (!in_unit(spec.epsilon_shot))
        throw ParameterError("simulate_campaign: epsilon_shot must lie in (0,1)");
      if (!(spec.tau0 > 0.0))
        throw ParameterError("simulate_campaign: tau0 must be positive");
      if (spec.time_rule == TimeRule::adaptive) {
        if (!(spec.h >= 1.0))
          throw ParameterError("simulate_campaign: adaptive rule needs h >= 1");
        if (!in_unit(spec.walk_delta) || !in_unit(spec.walk_eps))
          throw ParameterError("simulate_campaign: walk_delta, walk_eps must lie in (0,1)");
      }
      return;
  }
  throw ParameterError("simulate_campaign: unknown noise mode");
}

// Estimate a decay rate with the retry ladder: shots double (three times),
// then the evolution time halves; on the 7th failure the probe is abandoned.
// One derived stream per entry covers the chooser and every attempt, so the
// record is reproducible from (master_seed, probe_id) alone.
double estimate_rate_with_retries(double gamma_true, double delta, const NoiseSpec& spec,
                                  long probe_id, std::uint64_t stream_seed,
                                  std::vector<ShotRecord>& shots) {
  Rng stream(stream_seed);
  double t_base = 0.0;
  if (spec.time_rule == TimeRule::adaptive) {
    const RamseySampler sampler = [gamma_true](double t, Rng& r) {
      return r.bernoulli(0.5 * (1.0 + std::exp(-gamma_true * t)));
    };
    const double eta = spec.eta < 0.0 ? spec.h / spec.walk.mu : spec.eta;
    const long n_walks = walk_trials_for(spec.walk_delta, spec.walk_eps, spec.walk);
    t_base = choose_time(sampler, spec.tau0, spec.h, eta, n_walks, stream, spec.walk);
  } else {
    t_base = gamma_true > 0.0 ? 1.0 / gamma_true : spec.tau0;
  }

  const long n0 = trials_for(delta, spec.epsilon_shot);
  for (int attempt = 0; attempt < 7; ++attempt) {
    const long n_trials = n0 << std::min(attempt, 3);
    const double t = t_base / static_cast<double>(1L << std::max(0, attempt - 3));
    const ShotCounts counts = sample_ramsey(gamma_true, 0.0, t, n_trials, stream);
    shots.push_back(ShotRecord{probe_id, t, counts.n_plus, counts.n_minus, stream_seed});
    if (const auto est = estimate_gamma(counts)) return est->gamma_hat;
  }
  throw EstimationError(
      "simulate_campaign: observed contrast stayed nonpositive through the retry "
      "ladder on probe " +
          std::to_string(probe_id),
      probe_id);
}

}  // namespace

Probe draw_probe(int n, Rng& rng) {
  if (n < 1) throw ParameterError("draw_probe: n must be >= 1");
  Probe p;
  p.a.resize(n);
  p.b.resize(n);
  while (true) {
    bool distinct = false;
    for (int i = 0; i < n; ++i) {
      p.a[i] = static_cast<int>(rng.uniform_below(2));
      p.b[i] = static_cast<int>(rng.uniform_below(2));
      distinct = distinct || (p.a[i] != p.b[i]);
    }
    if (distinct) return p;
  }
}

SensingEnsemble draw_ensemble(int n, long m, std::uint64_t seed) {
  if (n < 1) throw ParameterError("draw_ensemble: n must be >= 1");
  if (m < 0) throw ParameterError("draw_ensemble: m must be >= 0");
  SensingEnsemble ensemble;
  ensemble.n = n;
  ensemble.master_seed = seed;
  ensemble.probes.reserve(static_cast<std::size_t>(m));
  // One derived stream per probe: ensembles drawn from the same seed are
  // prefix-nested in m, which lets sweeps over m reuse rows and factors.
  for (long j = 0; j < m; ++j) {
    Rng rng = Rng::derive(seed, kProbeStream, static_cast<std::uint64_t>(j));
    ensemble.probes.push_back(draw_probe(n, rng));
  }
  return ensemble;
}

Eigen::VectorXd apply_sensing(const NoiseModel& model, const SensingEnsemble& ensemble) {
  check_ensemble(ensemble);
  check_model_matches(model, ensemble, "apply_sensing");
  if (!model.is_real())
    throw ParameterError("apply_sensing: decay rates need a real model (T = R = 0)");
  Eigen::VectorXd phi(ensemble.m());
  for (long j = 0; j < ensemble.m(); ++j)
    phi[j] = decay_rate(model, ensemble.probes[j].r());
  return phi;
}

Eigen::MatrixXd sensing_matrix(const SensingEnsemble& ensemble) {
  check_ensemble(ensemble);
  const int n = ensemble.n;
  const long p = static_cast<long>(n) * (n - 1) / 2;
  Eigen::MatrixXd rows(ensemble.m(), p);
  for (long row = 0; row < ensemble.m(); ++row) {
    const Eigen::VectorXi r = ensemble.probes[row].r();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        rows(row, pair_index(i, j, n)) = 4.0 * r[i] * r[j];
  }
  return rows;
}

Eigen::MatrixXd diag_sensing_matrix(const SensingEnsemble& ensemble) {
  check_ensemble(ensemble);
  Eigen::MatrixXd rows(ensemble.m(), ensemble.n);
  for (long row = 0; row < ensemble.m(); ++row) {
    const Eigen::VectorXi r = ensemble.probes[row].r();
    for (int i = 0; i < ensemble.n; ++i) rows(row, i) = 2.0 * r[i] * r[i];
  }
  return rows;
}

Campaign simulate_campaign(const NoiseModel& model, const SensingEnsemble& ensemble,
                           const NoiseSpec& spec, std::uint64_t master_seed) {
  check_ensemble(ensemble);
  check_model_matches(model, ensemble, "simulate_campaign");
  if (!model.is_real())
    throw ParameterError("simulate_campaign: campaigns need a real model (T = R = 0)");
  check_noise_spec(spec);

  Campaign out;
  out.noise = spec;
  out.master_seed = master_seed;
  const Eigen::VectorXd g_true = model.V.diagonal();
  const Eigen::VectorXd h_true = apply_sensing(model, ensemble);

  switch (spec.mode) {
    case NoiseMode::exact: {
      out.g = g_true;
      out.h = h_true;
      break;
    }
    case NoiseMode::gaussian: {
      out.g = g_true;
      out.h = h_true;
      Rng noise = Rng::derive(master_seed, kGaussStream);
      for (long j = 0; j < out.h.size(); ++j) out.h[j] += spec.sigma_eps * noise.normal();
      break;
    }
    case NoiseMode::shot: {
      const int n = ensemble.n;
      out.g.resize(n);
      out.h.resize(ensemble.m());
      // Single-qubit probes (a = 0, b = e_j) see rate 2 c_jj; g stores c_jj.
      for (int j = 0; j < n; ++j) {
        const std::uint64_t sseed =
            Rng::derive_seed(master_seed, kDiagStream, static_cast<std::uint64_t>(j));
        out.g[j] = estimate_rate_with_retries(2.0 * g_true[j], spec.delta1, spec, j,
                                              sseed, out.shots) /
                   2.0;
      }
      for (long j = 0; j < ensemble.m(); ++j) {
        const std::uint64_t sseed =
            Rng::derive_seed(master_seed, kPairStream, static_cast<std::uint64_t>(j));
        out.h[j] = estimate_rate_with_retries(h_true[j], spec.delta2, spec, n + j, sseed,
                                              out.shots);
      }
      break;
    }
  }
  return out;
}

MomentReport isotropy_moments(int n, long samples, Rng& rng) {
  if (n < 2) throw ParameterError("isotropy_moments: n must be >= 2");
  if (samples < 1000) throw ParameterError("isotropy_moments: need at least 10^3 samples");
  const long p = static_cast<long>(n) * (n - 1) / 2;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd q(p);
  double max_sq = 0.0;
  for (long k = 0; k < samples; ++k) {
    const Probe probe = draw_probe(n, rng);
    const Eigen::VectorXi r = probe.r();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        q[pair_index(i, j, n)] = 4.0 * r[i] * r[j];
    mean += q;
    second.selfadjointView<Eigen::Lower>().rankUpdate(q);
    const double peak = q.lpNorm<Eigen::Infinity>();
    max_sq = std::max(max_sq, peak * peak);
  }
  mean /= static_cast<double>(samples);
  second = Eigen::MatrixXd(second.selfadjointView<Eigen::Lower>()) /
           static_cast<double>(samples);

  MomentReport report;
  report.mean = mean;
  report.covariance = second - mean * mean.transpose();
  report.max_sq_entry = max_sq;
  report.samples = samples;
  return report;
}

Eigen::VectorXd complex_probe_row(const Eigen::VectorXi& alpha, const Eigen::VectorXi& beta) {
  const long n = alpha.size();
  if (beta.size() != n)
    throw StructuralError("complex_probe_row: sign vectors differ in length");
  if (n < 2) throw StructuralError("complex_probe_row: need at least two qubits");
  for (long i = 0; i < n; ++i)
    if (std::abs(alpha[i]) != 1 || std::abs(beta[i]) != 1)
      throw ParameterError("complex_probe_row: sign vectors must have entries +-1");

  const long p = n * (n - 1) / 2;
  Eigen::VectorXd q(2 * p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < static_cast<int>(n); ++j) {
      const int k = pair_index(i, j, static_cast<int>(n));
      q[k] = static_cast<double>(alpha[i] * beta[j] - beta[i] * alpha[j]);
      q[p + k] = static_cast<double>(beta[i] * beta[j] - alpha[i] * alpha[j]);
    }
  return q;
}

}  // namespace corrsense
