// End-to-end acceptance gates for the correlated-dephasing estimation
// pipeline. Each criterion prints exactly one PASS/FAIL line with its key
// numbers; the process exits 0 only when every requested criterion passes.
// Criteria can be selected by number on the command line (default: all).
//
// Statistical gates use seeds and tolerances pinned in this file; a failure
// is reproducible, never flaky.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "corrsense/experiments.hpp"
#include "corrsense/noise_model.hpp"
#include "corrsense/optim.hpp"
#include "corrsense/recovery.hpp"
#include "corrsense/rng.hpp"
#include "corrsense/sensing.hpp"
#include "corrsense/spam.hpp"
#include "corrsense/spectroscopy.hpp"

using namespace corrsense;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buffer[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buffer, sizeof buffer, pattern, args);
  va_end(args);
  return std::string(buffer);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// R^2 of the least-squares polynomial of the given degree.
double poly_r2(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const long n = static_cast<long>(x.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd b(n);
  for (long i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      a(i, j) = p;
      p *= x[static_cast<std::size_t>(i)];
    }
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  const double ss_res = (a * coef - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).square().sum();
  if (ss_tot <= 0.0) return ss_res <= 1e-18 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

// Loosened ADMM stopping rule used by every acceptance sweep: near the
// recovery threshold (and under measurement noise) the program's optimum is
// nearly degenerate and the duality-based stopping rule at the library
// defaults needs >25k iterations even though the iterate has long since
// reached the accuracy that matters here (errors of interest are >= 1e-3).
SolverOptions sweep_solver() {
  SolverOptions opts = experiment_solver_defaults();
  opts.tol_abs = 3e-6;
  opts.tol_rel = 3e-4;
  return opts;
}

std::vector<long> range_grid(long lo, long hi, long step) {
  std::vector<long> out;
  for (long m = lo; m <= hi; m += step) out.push_back(m);
  return out;
}

// Ten-instance noiseless sweep shared by the scaling fits; lazily computed
// once per process so criteria 2, 3, and 4 can reuse the (64, 12) anchor.
ExperimentConfig scaling_sweep_config(int n, int s, const std::vector<long>& grid,
                                      std::uint64_t seed) {
  ExperimentConfig config;
  config.kind = ExperimentKind::phase_transition;
  config.n = n;
  config.s = s;
  config.m_values = grid;
  config.instances = 10;
  config.master_seed = seed;
  config.threads = 1;
  config.solver = sweep_solver();
  return config;
}

const PhaseTransitionResult& anchor_sweep_64_12() {
  static const PhaseTransitionResult result = run_phase_transition(
      scaling_sweep_config(64, 12, range_grid(10, 320, 10), 212));
  return result;
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion_phase_transition() {
  ExperimentConfig config;
  config.kind = ExperimentKind::phase_transition;
  config.n = 64;
  config.s = 12;
  config.m_values = {8, 12};
  for (long m = 20; m <= 400; m += 20) config.m_values.push_back(m);
  config.m_values.push_back(500);  // >= 10 * s * ln(n) = 499.1
  config.instances = 20;
  config.master_seed = 101;
  config.threads = 1;
  config.solver = sweep_solver();

  const double t0 = now_seconds();
  const PhaseTransitionResult result = run_phase_transition(config);
  const double elapsed = now_seconds() - t0;

  bool low_ok = true, high_ok = true;
  double low_worst = 1e300, high_worst = 0.0;
  long failures = 0;
  for (const SweepRecord& row : result.rows) {
    failures += row.failures;
    if (row.m <= config.s) {
      low_ok = low_ok && row.err_inf > 1.0;
      low_worst = std::min(low_worst, row.err_inf);
    }
    if (row.m >= 500) {
      high_ok = high_ok && row.err_inf < 0.25;
      high_worst = std::max(high_worst, row.err_inf);
    }
  }
  const bool time_ok = elapsed < 900.0;
  Outcome out;
  out.pass = low_ok && high_ok && time_ok;
  out.detail = fmt(
      "n=64 s=12: mean error %.3f at m<=12 (need >1), %.2e at m=500 (need <0.25), "
      "m_c=%.1f, %ld failed solves, %.0f s (limit 900)",
      low_worst, high_worst, result.m_c, failures, elapsed);
  return out;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_mc_linear_in_s() {
  std::vector<double> svals, mcs;
  std::string per_s;
  bool finite = true;
  for (int s : {4, 8, 12, 16, 20}) {
    double mc = 0.0;
    if (s == 12) {
      mc = anchor_sweep_64_12().m_c;
    } else {
      const PhaseTransitionResult result = run_phase_transition(
          scaling_sweep_config(64, s, range_grid(10, 320, 10), 200 + s));
      mc = result.m_c;
    }
    finite = finite && std::isfinite(mc);
    svals.push_back(s);
    mcs.push_back(mc);
    per_s += fmt("%s%d:%.0f", per_s.empty() ? "" : " ", s, mc);
  }
  const double r2 = finite ? poly_r2(svals, mcs, 1) : 0.0;
  Outcome out;
  out.pass = finite && r2 >= 0.9;
  out.detail = fmt("m_c by s {%s}, linear fit R^2=%.3f (need >=0.9)", per_s.c_str(), r2);
  return out;
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_mc_polylog_in_n() {
  std::vector<double> lnn, mcs;
  std::string per_n;
  bool finite = true;
  double mc16 = 0.0, mc128 = 0.0;
  for (int n : {16, 32, 64, 128}) {
    double mc = 0.0;
    if (n == 64) {
      mc = anchor_sweep_64_12().m_c;
    } else {
      const long hi = n == 128 ? 280 : (n == 32 ? 240 : 200);
      const long step = n == 128 ? 20 : 10;
      const PhaseTransitionResult result = run_phase_transition(
          scaling_sweep_config(n, 12, range_grid(step, hi, step), 300 + n));
      mc = result.m_c;
    }
    finite = finite && std::isfinite(mc);
    if (n == 16) mc16 = mc;
    if (n == 128) mc128 = mc;
    lnn.push_back(std::log(n));
    mcs.push_back(mc);
    per_n += fmt("%s%d:%.0f", per_n.empty() ? "" : " ", n, mc);
  }
  const double r2_lin = finite ? poly_r2(lnn, mcs, 1) : 0.0;
  const double r2_quad = finite ? poly_r2(lnn, mcs, 2) : 0.0;
  const double r2 = std::max(r2_lin, r2_quad);
  const double ratio = mc128 / mc16;
  Outcome out;
  out.pass = finite && r2 >= 0.9 && ratio <= 3.0;
  out.detail = fmt(
      "m_c by n {%s}, best low-degree fit in ln(n) R^2=%.3f (need >=0.9), "
      "m_c(128)/m_c(16)=%.2f (need <=3)",
      per_n.c_str(), r2, ratio);
  return out;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_noise_linearity() {
  const double mc = anchor_sweep_64_12().m_c;
  ExperimentConfig config;
  config.kind = ExperimentKind::noise_sweep;
  config.n = 64;
  config.s = 12;
  config.m_values = {std::llround(2.0 * mc)};
  config.sigma_values = {0.01, 0.03, 0.1, 0.3};
  config.instances = 10;
  config.master_seed = 401;
  config.threads = 1;
  config.solver = sweep_solver();

  const NoiseSweepResult result = run_noise_sweep(config);
  long failures = 0;
  for (const SweepRecord& row : result.rows) failures += row.failures;
  Outcome out;
  out.pass = std::isfinite(result.slope) && result.slope >= 0.8 && result.slope <= 1.2;
  out.detail = fmt(
      "error vs sigma at m=2*m_c=%ld: log-log slope %.3f (need within [0.8, 1.2]), "
      "%ld failed solves",
      config.m_values.front(), result.slope, failures);
  return out;
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_rate_estimator_concentration() {
  const double delta = 0.05, epsilon = 0.01, gamma = 1.0;
  const long n_trials = trials_for(delta, epsilon);
  const long runs = 10000;
  const double bound = 2.0 * delta * std::exp(2.0) * gamma;  // at gamma * t = 1
  long failures = 0;
  for (long r = 0; r < runs; ++r) {
    Rng rng(Rng::derive(505, 1, static_cast<std::uint64_t>(r)));
    const ShotCounts counts = sample_ramsey(gamma, 0.0, 1.0 / gamma, n_trials, rng);
    const std::optional<DecayEstimate> est = estimate_gamma(counts);
    if (!est || std::abs(est->gamma_hat - gamma) > bound) ++failures;
  }
  const double rate = static_cast<double>(failures) / static_cast<double>(runs);
  Outcome out;
  out.pass = rate <= 2.0 * epsilon;
  out.detail = fmt(
      "|estimate - %.0f| <= %.3f with N=%ld shots: %ld/%ld misses (rate %.4f, "
      "allowed %.2f)",
      gamma, bound, n_trials, failures, runs, rate, 2.0 * epsilon);
  return out;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_time_chooser() {
  const double h = 8.0;
  const WalkConstants wc;
  const double eta = h / wc.mu;
  const long walks = walk_trials_for(0.4, 0.05, wc);
  const long s_clamp = static_cast<long>(std::ceil(h)) + 64;
  const long reps = 200;

  // Bracketing success of the full chooser, one cell per starting mismatch.
  long worst_hits = reps;
  int worst_exponent = 0;
  for (int e = -8; e <= 8; ++e) {
    const double tau0 = std::ldexp(1.0, e);  // gamma = 1, so gamma*tau0 = 2^e
    const RamseySampler sampler = decay_sampler(1.0, tau0, s_clamp);
    Rng rng(Rng::derive(606, static_cast<std::uint64_t>(e + 512)));
    long hits = 0;
    for (long r = 0; r < reps; ++r) {
      const double t_hat = choose_time(sampler, tau0, h, eta, walks, rng, wc);
      if (t_hat > 0.5 && t_hat < 2.0) ++hits;
    }
    if (hits < worst_hits) {
      worst_hits = hits;
      worst_exponent = e;
    }
  }
  const bool cells_ok = worst_hits >= static_cast<long>(0.9 * reps);

  // Steps-to-90% boundary growth across the same mismatch range.
  ExperimentConfig config;
  config.kind = ExperimentKind::time_chooser;
  config.exponent_range = 8;
  config.step_values = {2, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 178};
  config.repetitions = reps;
  config.tau0 = 1.0;
  config.chooser_h = h;
  config.chooser_eta = -1.0;  // h / mu
  config.walk_delta = 0.4;
  config.walk_eps = 0.05;
  config.master_seed = 616;
  config.threads = 1;
  const TimeChooserResult map = run_time_chooser_map(config);
  bool attained = true;
  long bmin = config.step_values.back(), bmax = 0;
  for (long b : map.boundary_steps) {
    attained = attained && b >= 0;
    if (b >= 0) {
      bmin = std::min(bmin, b);
      bmax = std::max(bmax, b);
    }
  }
  const bool growth_ok = attained && (bmax == bmin || map.boundary_r2 >= 0.9);

  Outcome out;
  out.pass = cells_ok && growth_ok;
  out.detail = fmt(
      "bracket success >= %ld/%ld per cell (worst %ld at 2^%d); 90%% boundary "
      "%ld..%ld steps, linear fit vs |log2(gamma*tau0)| R^2=%.3f",
      static_cast<long>(0.9 * reps), reps, worst_hits, worst_exponent, bmin, bmax,
      map.boundary_r2);
  return out;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_isotropy_incoherence() {
  // Exhaustive moments at n = 4: all 256 ordered (a, b) pairs, a == b included,
  // must give mean 0 and second moment exactly 4 I (integer sums, no rounding).
  const int n4 = 4, d4 = 6;
  Eigen::VectorXd mean4 = Eigen::VectorXd::Zero(d4);
  Eigen::MatrixXd second4 = Eigen::MatrixXd::Zero(d4, d4);
  for (int amask = 0; amask < 16; ++amask) {
    for (int bmask = 0; bmask < 16; ++bmask) {
      Eigen::VectorXi r(n4);
      for (int i = 0; i < n4; ++i) r[i] = ((bmask >> i) & 1) - ((amask >> i) & 1);
      Eigen::VectorXd q(d4);
      for (int i = 0, k = 0; i < n4; ++i)
        for (int j = i + 1; j < n4; ++j, ++k) q[k] = 4.0 * r[i] * r[j];
      mean4 += q;
      second4 += q * q.transpose();
    }
  }
  mean4 /= 256.0;
  second4 /= 256.0;
  const double mean_dev = mean4.cwiseAbs().maxCoeff();
  const double second_dev =
      (second4 - 4.0 * Eigen::MatrixXd::Identity(d4, d4)).cwiseAbs().maxCoeff();
  const bool exact_ok = mean_dev == 0.0 && second_dev == 0.0;

  // Sampled second moment at n = 32 within 4 standard errors entrywise.
  const int n = 32;
  const long samples = 100000;
  Rng rng(707);
  const MomentReport report = isotropy_moments(n, samples, rng);
  const long d = report.covariance.rows();
  std::vector<std::pair<int, int>> pairs(static_cast<std::size_t>(d));
  for (long k = 0; k < d; ++k) pairs[static_cast<std::size_t>(k)] = pair_from_index(k, n);
  // Entry variances of the exact distribution: 48 on the diagonal, 32 for
  // rows sharing one qubit, 16 for disjoint rows.
  const double se_diag = std::sqrt(48.0 / samples);
  const double se_share = std::sqrt(32.0 / samples);
  const double se_disjoint = std::sqrt(16.0 / samples);
  double worst_z = 0.0;
  for (long a = 0; a < d; ++a) {
    const auto [i, j] = pairs[static_cast<std::size_t>(a)];
    for (long b = 0; b < d; ++b) {
      const auto [k, l] = pairs[static_cast<std::size_t>(b)];
      const int shared = static_cast<int>(i == k) + static_cast<int>(i == l) +
                         static_cast<int>(j == k) + static_cast<int>(j == l);
      const double target = a == b ? 4.0 : 0.0;
      const double se = a == b ? se_diag : (shared == 1 ? se_share : se_disjoint);
      worst_z = std::max(worst_z, std::abs(report.covariance(a, b) - target) / se);
    }
  }
  const bool cov_ok = worst_z <= 4.0;
  const bool incoherent = report.max_sq_entry <= 16.0;

  Outcome out;
  out.pass = exact_ok && cov_ok && incoherent;
  out.detail = fmt(
      "n=4 exhaustive moments exact (dev %.1e/%.1e); n=32 second moment worst "
      "|z|=%.2f of 4 allowed; max row entry^2 %.0f <= 16",
      mean_dev, second_dev, worst_z, report.max_sq_entry);
  return out;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion_direct_estimator_bound() {
  const int n = 16;
  const double delta = 0.05;
  const NoiseModel model = random_sparse_model(n, 12, 808);
  const Eigen::MatrixXd true_off = off_diag_of(model.V);

  SensingEnsemble pair_probes;
  pair_probes.n = n;
  pair_probes.master_seed = 0;
  std::vector<std::pair<int, int>> index_of;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Probe p;
      p.a = Eigen::VectorXi::Zero(n);
      p.b = Eigen::VectorXi::Zero(n);
      p.b[i] = p.b[j] = 1;
      pair_probes.probes.push_back(std::move(p));
      index_of.emplace_back(i, j);
    }
  }

  NoiseSpec spec;
  spec.mode = NoiseMode::shot;
  spec.delta1 = delta;
  spec.delta2 = delta;
  spec.epsilon_shot = 0.05;
  spec.time_rule = TimeRule::oracle;

  const long campaigns = 500;
  double sq_sum = 0.0;
  long estimator_failures = 0;
  for (long c = 0; c < campaigns; ++c) {
    try {
      const Campaign camp =
          simulate_campaign(model, pair_probes, spec,
                            Rng::derive_seed(808, 2, static_cast<std::uint64_t>(c)));
      std::vector<PairMeasurement> pair_rates;
      pair_rates.reserve(index_of.size());
      for (std::size_t k = 0; k < index_of.size(); ++k) {
        pair_rates.push_back(PairMeasurement{index_of[k].first, index_of[k].second,
                                             camp.h[static_cast<long>(k)]});
      }
      const NaiveEstimate est = naive_reconstruct(2.0 * camp.g, pair_rates, n);
      sq_sum += (est.c_off - true_off).squaredNorm();
    } catch (const EstimationError&) {
      ++estimator_failures;
    }
  }
  const double mean_sq = sq_sum / static_cast<double>(campaigns - estimator_failures);
  const double bound = naive_error_bound_sq(stats_of(model), delta, delta);
  Outcome out;
  out.pass = estimator_failures == 0 && mean_sq <= bound;
  out.detail = fmt(
      "mean squared Frobenius error %.3f over %ld shot campaigns <= bound %.3f "
      "(%ld abandoned probes)",
      mean_sq, campaigns, bound, estimator_failures);
  return out;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion_spam_robustness() {
  const int n = 3;
  ExperimentConfig config;
  config.kind = ExperimentKind::spam;
  config.n = n;
  config.spam_deltas = {0.01};
  config.gamma0 = 1.0;
  config.spam_seeds = 20;
  config.curve_points = 48;
  config.time_span = 1.0;  // fit window [0, 1/Gamma]
  config.master_seed = 909;
  config.threads = 1;
  const SpamExperimentResult result = run_spam_experiment(config);

  bool fits_ok = true;
  double worst_dev = 0.0;
  for (const SpamFitRow& row : result.fits) {
    fits_ok = fits_ok && row.converged && row.rel_deviation <= 0.05;
    worst_dev = std::max(worst_dev, row.rel_deviation);
  }

  // Exact interaction-term derivative check on the same channels: the rate of
  // drift of Tr[dE evolve_t(drho)] must respect 2 eps_m eps_s (n + s) with s
  // counting both triangles of the coupling support (4 for this chain).
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    v(i, i) = config.gamma0;
    if (i + 1 < n) v(i, i + 1) = v(i + 1, i) = config.gamma0 / 4.0;
  }
  const NoiseModel model = NoiseModel::real(v);
  const Eigen::VectorXi a = Eigen::VectorXi::Zero(n);
  const Eigen::VectorXi b = Eigen::VectorXi::Ones(n);
  const Eigen::MatrixXcd rho0 = superposition_projector(a, b);
  const double gamma_true = decay_rate(model, b - a);
  const int off_support = 4;

  bool drift_ok = true;
  double worst_margin = 0.0;  // largest |finite difference| / bound seen
  const long grid = 96;
  for (const SpamFitRow& row : result.fits) {
    const SpamChannelPair channels = random_spam_channels(n, row.delta, row.channel_seed);
    const Eigen::MatrixXcd drho = channels.prep.apply(rho0) - rho0;
    const Eigen::MatrixXcd de = channels.meas.apply(rho0) - rho0;
    const double bound = 2.0 * row.eps_m * row.eps_s * (n + off_support);
    double prev = (de * drho).trace().real();  // R(0)
    const double dt = (1.0 / gamma_true) / static_cast<double>(grid);
    for (long k = 1; k <= grid; ++k) {
      const double t = dt * static_cast<double>(k);
      const double cur = (de * evolve_dephasing(drho, model, t)).trace().real();
      const double slope = std::abs(cur - prev) / dt;
      worst_margin = std::max(worst_margin, slope / bound);
      drift_ok = drift_ok && slope <= bound + 1e-12;
      prev = cur;
    }
  }

  Outcome out;
  out.pass = fits_ok && drift_ok;
  out.detail = fmt(
      "20 channels at strength 0.01: worst fitted-rate deviation %.2f%% (allowed 5%%); "
      "interaction drift at most %.2f of its bound",
      100.0 * worst_dev, worst_margin);
  return out;
}

// --------------------------------------------------------------- criterion 10

Outcome criterion_complex_recovery() {
  const int n = 16, planted = 2;
  const long m = 96;
  double worst = 0.0;
  bool converged = true;
  for (std::uint64_t seed : {1010ull, 1011ull, 1012ull}) {
    Rng rng(seed);
    NoiseModel model = NoiseModel::real(2.0 * Eigen::MatrixXd::Identity(n, n));
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
    rng.shuffle(all);
    for (int k = 0; k < planted; ++k) {
      const auto [i, j] = all[static_cast<std::size_t>(k)];
      const double value = rng.bernoulli(0.5) ? 0.4 : -0.4;
      model.T(i, j) = value;
      model.T(j, i) = -value;
    }
    for (int k = planted; k < 2 * planted; ++k) {
      const auto [i, j] = all[static_cast<std::size_t>(k)];
      const double value = rng.bernoulli(0.5) ? 0.3 : -0.3;
      model.R(i, j) = value;
      model.R(j, i) = value;
    }

    const SensingEnsemble ensemble = draw_ensemble(n, m, Rng::derive_seed(seed, 3));
    Eigen::VectorXd omega(m);
    for (long j = 0; j < m; ++j) {
      omega[j] = complex_rates(model, ensemble.probes[static_cast<std::size_t>(j)].alpha(),
                               ensemble.probes[static_cast<std::size_t>(j)].beta())
                     .omega;
    }
    RecoveryOptions opts;
    opts.solver.max_iterations = 200000;
    opts.solver.tol_abs = 1e-10;
    opts.solver.tol_rel = 1e-8;
    const ComplexRecovery rec = recover_complex(omega, ensemble, 0.0, opts);
    converged = converged && rec.diag.converged;
    worst = std::max(
        worst, std::hypot((rec.T - model.T).norm(), (rec.R - model.R).norm()));
  }
  Outcome out;
  out.pass = converged && worst < 1e-4;
  out.detail = fmt(
      "n=16, 2+2 planted pairs, m=96 exact rotation rates: worst joint Frobenius "
      "error %.2e (need < 1e-4) over 3 seeds",
      worst);
  return out;
}

// --------------------------------------------------------------- criterion 11

Outcome criterion_solver_oracle_equivalence() {
  const int n = 6, d = 15;
  const long m = 12;
  const long instances = 50;
  double worst_value_gap = 0.0, worst_residual = 0.0;
  long brute_infeasible = 0;
  for (long inst = 0; inst < instances; ++inst) {
    const NoiseModel model =
        random_sparse_model(n, 1, 1100 + static_cast<std::uint64_t>(inst));
    const SensingEnsemble ensemble =
        draw_ensemble(n, m, 1150 + static_cast<std::uint64_t>(inst));
    const Eigen::MatrixXd q = sensing_matrix(ensemble);
    const Eigen::VectorXd target =
        apply_sensing(model, ensemble) - diag_sensing_matrix(ensemble) * diag_of(model.V);

    // Exhaustive minimum over single-pair supports: the only candidates that
    // can satisfy all m constraints exactly.
    double brute_best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d; ++k) {
      const Eigen::VectorXd col = q.col(k);
      const double denom = col.squaredNorm();
      if (denom == 0.0) continue;
      const double coeff = col.dot(target) / denom;
      if ((col * coeff - target).norm() > 1e-9) continue;
      brute_best = std::min(brute_best, std::abs(coeff));
    }
    if (!std::isfinite(brute_best)) {
      ++brute_infeasible;
      continue;
    }

    SolverOptions opts;
    opts.max_iterations = 200000;
    opts.tol_abs = 1e-12;
    opts.tol_rel = 1e-10;
    const ConstrainedL1Result solved = constrained_l1_solve(q, target, 0.0, opts);
    worst_residual = std::max(worst_residual, (q * solved.w - target).norm());
    worst_value_gap =
        std::max(worst_value_gap, std::abs(solved.w.cwiseAbs().sum() - brute_best));
  }
  Outcome out;
  out.pass =
      brute_infeasible == 0 && worst_value_gap <= 1e-8 && worst_residual <= 1e-8;
  out.detail = fmt(
      "sparse program vs exhaustive single-pair minimum over %ld instances: worst "
      "objective gap %.1e, worst constraint residual %.1e (both need <= 1e-8)",
      instances, worst_value_gap, worst_residual);
  return out;
}

struct Criterion {
  int index;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "noiseless recovery phase transition", criterion_phase_transition},
    {2, "measurement budget linear in sparsity", criterion_mc_linear_in_s},
    {3, "measurement budget polylogarithmic in qubits", criterion_mc_polylog_in_n},
    {4, "recovery error linear in measurement noise", criterion_noise_linearity},
    {5, "decay-rate estimator concentration", criterion_rate_estimator_concentration},
    {6, "adaptive evolution-time chooser", criterion_time_chooser},
    {7, "probe isotropy and incoherence", criterion_isotropy_incoherence},
    {8, "direct estimator error bound", criterion_direct_estimator_bound},
    {9, "robustness to preparation/measurement errors", criterion_spam_robustness},
    {10, "joint recovery of rotation-rate parts", criterion_complex_recovery},
    {11, "solver agrees with exhaustive oracle", criterion_solver_oracle_equivalence},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_pass = true;
  for (const Criterion& criterion : kCriteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), criterion.index) == selected.end()) {
      continue;
    }
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = fmt("threw %s", e.what());
    }
    std::printf("%s %2d  %s: %s\n", outcome.pass ? "PASS" : "FAIL", criterion.index,
                criterion.name, outcome.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
