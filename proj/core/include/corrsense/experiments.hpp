#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "corrsense/optim.hpp"
#include "corrsense/sensing.hpp"
#include "corrsense/spectroscopy.hpp"

namespace corrsense {

// Declarative experiment harness. Every runner consumes a validated config,
// derives all randomness from the master seed (never from global state), and
// emits a CSV string whose header embeds the config, so a rerun of the same
// config reproduces the artifact byte for byte.

enum class ExperimentKind {
  phase_transition,
  noise_sweep,
  spam,
  time_chooser,
  plan,
  complex_recovery,
};

/// Looser-than-library solver tolerances used by the sweep runners, where
/// thousands of solves trade a little accuracy for wall time.
SolverOptions experiment_solver_defaults();

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::phase_transition;
  int n = 64;
  int s = 12;
  std::vector<long> m_values;
  std::vector<double> sigma_values;
  long instances = 20;
  std::uint64_t master_seed = 0;
  std::string out;
  int threads = 1;
  bool include_measured_runtime = false;  // keeps reruns byte-identical when off
  SolverOptions solver = experiment_solver_defaults();

  // Decay-curve robustness runs.
  std::vector<double> spam_deltas;
  double gamma0 = 1.0;
  long spam_seeds = 20;
  long curve_points = 60;
  double time_span = 3.0;  // curve extent in units of 1 / Gamma

  // Adaptive-time success map.
  int exponent_range = 8;  // columns gamma tau0 = 2^-r .. 2^r
  std::vector<long> step_values;
  long repetitions = 200;
  double tau0 = 1.0;
  double chooser_h = 8.0;
  double chooser_eta = -1.0;  // negative means h / mu
  double walk_delta = 1.0;
  double walk_eps = 0.2;
  WalkConstants walk;

  // Sample-count planning.
  double plan_delta = 0.1;
  std::string plan_method = "cs-rip";
};

/// Throws ParameterError / CapacityError when the fields used by
/// config.kind are out of range; other kinds' fields are ignored.
void validate_config(const ExperimentConfig& config);

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% percentile interval of the mean under `resamples` bootstrap
/// resamples drawn from the given seed. The interval straddles the sample
/// mean by construction.
BootstrapInterval bootstrap_ci(const std::vector<double>& values, long resamples,
                               std::uint64_t seed);

/// First m where the mean error crosses below `threshold`, linearly
/// interpolated between the bracketing sweep points. Returns the smallest
/// m when already below at the start and NaN when never below.
double critical_m(const std::vector<long>& m_values,
                  const std::vector<double>& mean_errors, double threshold = 0.25);

/// One aggregated sweep row: a parameter combination, the error metrics
/// averaged over the surviving instances, and the bootstrap interval for
/// the mean max-entry error.
struct SweepRecord {
  int n = 0;
  int s = 0;
  long m = 0;
  double sigma_eps = 0.0;
  long instances = 0;
  long failures = 0;
  double err_inf = 0.0;
  double err_fro = 0.0;
  double err_l1 = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double runtime_s = 0.0;
};

struct PhaseTransitionResult {
  std::vector<SweepRecord> rows;
  double m_c = std::numeric_limits<double>::quiet_NaN();
  std::string csv;
};

/// Noiseless (or fixed-noise) recovery error as a function of the number
/// of probe settings, averaged over independent random instances.
PhaseTransitionResult run_phase_transition(const ExperimentConfig& config);

struct NoiseSweepResult {
  std::vector<SweepRecord> rows;
  // log-log slope of the mean error against sigma at the largest m.
  double slope = std::numeric_limits<double>::quiet_NaN();
  double m_c = std::numeric_limits<double>::quiet_NaN();  // at the smallest sigma
  std::string csv;
};

/// Phase-transition sweep repeated across measurement-noise strengths,
/// with instance draws shared across sigma so comparisons are paired.
NoiseSweepResult run_noise_sweep(const ExperimentConfig& config);

struct SpamFitRow {
  double delta = 0.0;
  std::uint64_t channel_seed = 0;
  double rate = 0.0;
  double gamma_true = 0.0;
  double rel_deviation = 0.0;
  double eps_s = 0.0;
  double eps_m = 0.0;
  bool converged = false;
};

struct SpamExperimentResult {
  std::vector<SpamFitRow> fits;
  double gamma_true = 0.0;
  std::string csv;  // decay curves for the first seed plus all fit rows
};

/// Decay curves and fitted rates for a nearest-neighbor model under random
/// preparation/measurement channels of each configured strength.
SpamExperimentResult run_spam_experiment(const ExperimentConfig& config);

/// Ramsey sampler for a pure-decay coherence, P(+) = (1 + e^{-gamma t})/2,
/// memoizing the exponential per power-of-two multiple of tau0 (the only
/// times the exponent walk ever visits).
RamseySampler decay_sampler(double gamma, double tau0, long s_clamp);

struct TimeChooserCell {
  int exponent = 0;  // gamma tau0 = 2^exponent
  long n_steps = 0;
  double success = 0.0;  // fraction of repetitions with 1/2 < gamma t_hat < 2
};

struct TimeChooserResult {
  std::vector<TimeChooserCell> cells;
  // Per column: least steps reaching 90% success; -1 when never reached.
  std::vector<long> boundary_steps;
  std::vector<int> boundary_exponents;
  // R^2 of the linear fit of the attained boundary against |exponent|.
  double boundary_r2 = std::numeric_limits<double>::quiet_NaN();
  std::string csv;
};

/// Success-probability grid of the adaptive evolution-time chooser over
/// walk length and initial-guess mismatch.
TimeChooserResult run_time_chooser_map(const ExperimentConfig& config);

enum class PlanMethod { naive, cs_rip, cs_ripless };

PlanMethod plan_method_from_name(const std::string& name);
std::string plan_method_name(PlanMethod method);

struct PlanStage {
  double settings = 0.0;
  double samples_per_setting = 0.0;
  double total = 0.0;
};

/// Unit-constant reading of the asymptotic sample-count table; log means ln.
struct SamplePlan {
  PlanMethod method = PlanMethod::naive;
  int n = 0;
  int s = 0;
  double delta = 0.0;
  PlanStage single_qubit;
  PlanStage multi_qubit;
  double total = 0.0;
  double naive_total = 0.0;
  bool beats_naive = false;
  // The sparsity regime where the method wins asymptotically:
  // s <= n^{3/2} / ln^2 n (rip) or s <= n^{2/3} / ln^2 n (ripless).
  bool crossover_condition = false;
};

SamplePlan sample_complexity_plan(int n, int s, double delta, PlanMethod method);
std::string plan_to_csv(const SamplePlan& plan);

struct ComplexRecoveryResult {
  std::vector<SweepRecord> rows;
  std::string csv;
};

/// Round-trip error of the phase-part reconstruction from exact rotation
/// rates as the number of probes grows; config.s pairs are planted in each
/// of the skew and symmetric parts.
ComplexRecoveryResult run_complex_recovery(const ExperimentConfig& config);

}  // namespace corrsense
