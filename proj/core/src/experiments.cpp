#include "corrsense/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "corrsense/errors.hpp"
#include "corrsense/io.hpp"
#include "corrsense/recovery.hpp"
#include "corrsense/rng.hpp"
#include "corrsense/spam.hpp"

namespace corrsense {

namespace {

// Seed streams: one per independent source of randomness, so adding draws to
// one stage never perturbs another and paired comparisons stay paired.
constexpr std::uint64_t kModelStream = 0x6d6f64656c;
constexpr std::uint64_t kEnsembleStream = 0x656e7362;
constexpr std::uint64_t kCampaignStream = 0x63616d70;
constexpr std::uint64_t kBootstrapStream = 0x626f6f74;
constexpr std::uint64_t kSpamStream = 0x7370616d;
constexpr std::uint64_t kWalkStream = 0x77616c6b;

constexpr long kBootstrapResamples = 1000;

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

long pair_count(int n) { return static_cast<long>(n) * (n - 1) / 2; }

void check_positive_ascending(const std::vector<long>& values, const char* name) {
  if (values.empty()) throw ParameterError(std::string(name) + " must not be empty");
  long prev = 0;
  for (long v : values) {
    if (v < 1) throw ParameterError(std::string(name) + " entries must be at least 1");
    if (v <= prev) throw ParameterError(std::string(name) + " must be strictly ascending");
    prev = v;
  }
}

void check_finite_nonnegative(const std::vector<double>& values, const char* name) {
  if (values.empty()) throw ParameterError(std::string(name) + " must not be empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0) {
      throw ParameterError(std::string(name) + " entries must be finite and nonnegative");
    }
  }
}

void check_solver(const SolverOptions& solver) {
  if (solver.max_iterations < 1) throw ParameterError("solver: max_iterations must be positive");
  if (!(solver.tol_abs >= 0) || !(solver.tol_rel >= 0)) {
    throw ParameterError("solver: tolerances must be nonnegative");
  }
  if (!(solver.rho0 > 0)) throw ParameterError("solver: rho0 must be positive");
  if (!(solver.step_safety >= 1.0)) throw ParameterError("solver: step_safety must be >= 1");
}

void check_common(const ExperimentConfig& config) {
  if (config.threads < 1) throw ParameterError("threads must be at least 1");
  check_solver(config.solver);
}

void check_recovery_sweep(const ExperimentConfig& config, long minimum_s) {
  if (config.n < 2) throw ParameterError("sweeps need at least 2 qubits");
  if (config.s < minimum_s) throw ParameterError("s below the minimum for this experiment");
  if (config.instances < 1) throw ParameterError("instances must be at least 1");
  check_positive_ascending(config.m_values, "m_values");
}

// Mean over a nonempty vector.
double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit fit;
  const long n = static_cast<long>(x.size());
  if (n < 2 || y.size() != x.size()) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (long k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double det = n * sxx - sx * sx;
  if (det <= 0) return fit;  // all abscissae equal
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double y_bar = sy / n;
  for (long k = 0; k < n; ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += r * r;
    ss_tot += (y[k] - y_bar) * (y[k] - y_bar);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  return fit;
}

struct ErrorMetrics {
  double inf = 0.0;  // largest absolute row sum
  double fro = 0.0;
  double l1 = 0.0;  // sum of absolute entries
};

ErrorMetrics matrix_errors(const Eigen::MatrixXd& diff) {
  ErrorMetrics err;
  err.inf = diff.cwiseAbs().rowwise().sum().maxCoeff();
  err.fro = diff.norm();
  err.l1 = diff.cwiseAbs().sum();
  return err;
}

struct CellOutcome {
  bool failed = true;
  ErrorMetrics err;
  double seconds = 0.0;
};

// Work items are claimed through an atomic counter; every item writes only
// its own output slot, so results are identical for any thread count.
void run_parallel(long count, int threads, const std::function<void(long)>& work) {
  const int workers = static_cast<int>(std::min<long>(std::max(threads, 1), count));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const long i = next.fetch_add(1);
          if (i >= count) break;
          work(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
        next.store(count);  // stop the other workers promptly
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t row_bootstrap_seed(std::uint64_t master, long m_index, double sigma) {
  const std::uint64_t base =
      Rng::derive_seed(master, kBootstrapStream, static_cast<std::uint64_t>(m_index));
  return Rng::derive_seed(base, std::bit_cast<std::uint64_t>(sigma));
}

SweepRecord aggregate_row(const ExperimentConfig& config, long m, double sigma, long m_index,
                          const std::vector<const CellOutcome*>& cells) {
  SweepRecord row;
  row.n = config.n;
  row.s = config.s;
  row.m = m;
  row.sigma_eps = sigma;
  row.instances = static_cast<long>(cells.size());
  std::vector<double> inf_values;
  inf_values.reserve(cells.size());
  double fro = 0, l1 = 0, seconds = 0;
  for (const CellOutcome* cell : cells) {
    seconds += cell->seconds;
    if (cell->failed) {
      ++row.failures;
      continue;
    }
    inf_values.push_back(cell->err.inf);
    fro += cell->err.fro;
    l1 += cell->err.l1;
  }
  if (inf_values.empty()) {
    row.err_inf = row.err_fro = row.err_l1 = nan_value();
    row.ci_lo = row.ci_hi = nan_value();
  } else {
    const double survivors = static_cast<double>(inf_values.size());
    row.err_inf = mean_of(inf_values);
    row.err_fro = fro / survivors;
    row.err_l1 = l1 / survivors;
    const BootstrapInterval ci = bootstrap_ci(
        inf_values, kBootstrapResamples, row_bootstrap_seed(config.master_seed, m_index, sigma));
    row.ci_lo = ci.lo;
    row.ci_hi = ci.hi;
  }
  row.runtime_s = config.include_measured_runtime ? seconds : 0.0;
  return row;
}

std::string config_header(const ExperimentConfig& config) {
  return "# config: " + config_to_json(config) + "\n";
}

void append_long(std::string& csv, long v, char tail) {
  csv += std::to_string(v);
  csv += tail;
}

void append_double(std::string& csv, double v, char tail) {
  csv += format_double(v);
  csv += tail;
}

std::string sweep_csv(const ExperimentConfig& config, const std::vector<SweepRecord>& rows,
                      const std::vector<double>* row_m_c) {
  std::string csv = config_header(config);
  csv += "n,s,m,sigma_eps,instances,failures,err_inf,err_fro,err_l1,ci_lo,ci_hi,runtime_s";
  if (row_m_c != nullptr) csv += ",m_c";
  csv += '\n';
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const SweepRecord& row = rows[k];
    append_long(csv, row.n, ',');
    append_long(csv, row.s, ',');
    append_long(csv, row.m, ',');
    append_double(csv, row.sigma_eps, ',');
    append_long(csv, row.instances, ',');
    append_long(csv, row.failures, ',');
    append_double(csv, row.err_inf, ',');
    append_double(csv, row.err_fro, ',');
    append_double(csv, row.err_l1, ',');
    append_double(csv, row.ci_lo, ',');
    append_double(csv, row.ci_hi, ',');
    append_double(csv, row.runtime_s, row_m_c != nullptr ? ',' : '\n');
    if (row_m_c != nullptr) append_double(csv, (*row_m_c)[k], '\n');
  }
  return csv;
}

class StageTimer {
 public:
  explicit StageTimer(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double seconds() const {
    if (!enabled_) return 0.0;
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(now - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

// Shared engine of the phase-transition and noise sweeps: per instance draw
// one model and one ensemble at the largest m, measure once per noise level,
// then recover every prefix, reusing the Gram prefix and warm-starting each
// solve at the previous m's solution.
std::vector<CellOutcome> recovery_sweep_cells(const ExperimentConfig& config,
                                              const std::vector<double>& sigmas,
                                              bool gaussian) {
  const long m_count = static_cast<long>(config.m_values.size());
  const long sigma_count = static_cast<long>(sigmas.size());
  const long cells_per_instance = sigma_count * m_count;
  const long m_max = config.m_values.back();
  std::vector<CellOutcome> cells(
      static_cast<std::size_t>(config.instances * cells_per_instance));

  run_parallel(config.instances, config.threads, [&](long instance) {
    const NoiseModel model = random_sparse_model(
        config.n, config.s,
        Rng::derive_seed(config.master_seed, kModelStream, static_cast<std::uint64_t>(instance)));
    const SensingEnsemble ensemble = draw_ensemble(
        config.n, m_max,
        Rng::derive_seed(config.master_seed, kEnsembleStream,
                         static_cast<std::uint64_t>(instance)));
    const Eigen::MatrixXd q_full = sensing_matrix(ensemble);
    const Eigen::MatrixXd gram_full = q_full * q_full.transpose();
    const std::uint64_t campaign_seed = Rng::derive_seed(
        config.master_seed, kCampaignStream, static_cast<std::uint64_t>(instance));

    for (long si = 0; si < sigma_count; ++si) {
      NoiseSpec spec;
      spec.mode = gaussian ? NoiseMode::gaussian : NoiseMode::exact;
      spec.sigma_eps = sigmas[static_cast<std::size_t>(si)];
      const Campaign campaign = simulate_campaign(model, ensemble, spec, campaign_seed);

      Eigen::VectorXd warm;
      SensingEnsemble prefix;
      prefix.n = config.n;
      prefix.master_seed = ensemble.master_seed;
      for (long mi = 0; mi < m_count; ++mi) {
        const long m = config.m_values[static_cast<std::size_t>(mi)];
        prefix.probes.assign(ensemble.probes.begin(), ensemble.probes.begin() + m);
        const Eigen::MatrixXd gram = gram_full.topLeftCorner(m, m);
        RecoveryOptions opts;
        opts.solver = config.solver;
        opts.solver.gram = &gram;
        opts.solver.warm_start = warm.size() > 0 ? &warm : nullptr;
        const double eps2 = std::sqrt(static_cast<double>(m)) * spec.sigma_eps;

        CellOutcome& cell = cells[static_cast<std::size_t>(
            instance * cells_per_instance + si * m_count + mi)];
        const StageTimer timer(config.include_measured_runtime);
        try {
          const RecoveryResult result =
              cs_sequential(campaign.g, campaign.h.head(m), prefix, 0.0, eps2, opts);
          cell.failed = !result.solver_converged;
          if (!cell.failed) {
            cell.err = matrix_errors(result.W - model.V);
            warm = uvec(result.W);
          }
        } catch (const SolverError&) {
          cell.failed = true;
        }
        cell.seconds = timer.seconds();
      }
    }
  });
  return cells;
}

struct SweepTables {
  std::vector<SweepRecord> rows;  // sigma-major, m ascending within each sigma
  std::vector<double> group_m_c;  // one per sigma
  std::vector<double> row_m_c;    // group value repeated per row
};

SweepTables aggregate_sweep(const ExperimentConfig& config, const std::vector<double>& sigmas,
                            const std::vector<CellOutcome>& cells) {
  const long m_count = static_cast<long>(config.m_values.size());
  const long sigma_count = static_cast<long>(sigmas.size());
  const long cells_per_instance = sigma_count * m_count;
  SweepTables tables;
  tables.rows.reserve(static_cast<std::size_t>(sigma_count * m_count));
  for (long si = 0; si < sigma_count; ++si) {
    std::vector<double> mean_errors;
    mean_errors.reserve(static_cast<std::size_t>(m_count));
    for (long mi = 0; mi < m_count; ++mi) {
      std::vector<const CellOutcome*> column;
      column.reserve(static_cast<std::size_t>(config.instances));
      for (long instance = 0; instance < config.instances; ++instance) {
        column.push_back(&cells[static_cast<std::size_t>(instance * cells_per_instance +
                                                         si * m_count + mi)]);
      }
      tables.rows.push_back(aggregate_row(config, config.m_values[static_cast<std::size_t>(mi)],
                                          sigmas[static_cast<std::size_t>(si)], mi, column));
      mean_errors.push_back(tables.rows.back().err_inf);
    }
    tables.group_m_c.push_back(critical_m(config.m_values, mean_errors));
  }
  tables.row_m_c.reserve(tables.rows.size());
  for (long si = 0; si < sigma_count; ++si) {
    for (long mi = 0; mi < m_count; ++mi) {
      tables.row_m_c.push_back(tables.group_m_c[static_cast<std::size_t>(si)]);
    }
  }
  return tables;
}

const char* kPlanMethodNames[] = {"naive", "cs-rip", "cs-ripless"};

}  // namespace

SolverOptions experiment_solver_defaults() {
  SolverOptions solver;
  solver.max_iterations = 25000;
  solver.tol_abs = 1e-7;
  solver.tol_rel = 1e-5;
  return solver;
}

void validate_config(const ExperimentConfig& config) {
  check_common(config);
  switch (config.kind) {
    case ExperimentKind::phase_transition:
    case ExperimentKind::noise_sweep: {
      check_recovery_sweep(config, 0);
      if (config.s > pair_count(config.n)) {
        throw ParameterError("s exceeds the number of qubit pairs");
      }
      if (config.s > config.n - 1) {
        throw ParameterError("s exceeds the chain-construction budget n - 1");
      }
      if (config.kind == ExperimentKind::noise_sweep) {
        check_finite_nonnegative(config.sigma_values, "sigma_values");
      }
      break;
    }
    case ExperimentKind::spam: {
      if (config.n < 1) throw ParameterError("spam experiment needs at least 1 qubit");
      if (config.n > kMaxSpamQubits) {
        throw CapacityError("spam experiment supports at most " +
                            std::to_string(kMaxSpamQubits) + " qubits");
      }
      check_finite_nonnegative(config.spam_deltas, "spam_deltas");
      if (!(config.gamma0 > 0) || !std::isfinite(config.gamma0)) {
        throw ParameterError("gamma0 must be positive");
      }
      if (config.spam_seeds < 1) throw ParameterError("spam_seeds must be at least 1");
      if (config.curve_points < 8) throw ParameterError("curve_points must be at least 8");
      if (!(config.time_span > 0) || !std::isfinite(config.time_span)) {
        throw ParameterError("time_span must be positive");
      }
      break;
    }
    case ExperimentKind::time_chooser: {
      if (config.exponent_range < 0) throw ParameterError("exponent_range must be nonnegative");
      check_positive_ascending(config.step_values, "step_values");
      if (config.repetitions < 1) throw ParameterError("repetitions must be at least 1");
      if (!(config.tau0 > 0) || !std::isfinite(config.tau0)) {
        throw ParameterError("tau0 must be positive");
      }
      if (!(config.chooser_h >= 1)) throw ParameterError("chooser_h must be at least 1");
      if (!(config.walk_delta > 0)) throw ParameterError("walk_delta must be positive");
      if (!(config.walk_eps > 0 && config.walk_eps < 1)) {
        throw ParameterError("walk_eps must lie in (0, 1)");
      }
      if (!(config.walk.mu > 0) || !(config.walk.K > 0) || !(config.walk.c > 0)) {
        throw ParameterError("walk constants must be positive");
      }
      break;
    }
    case ExperimentKind::plan: {
      if (config.n < 2) throw ParameterError("plan needs at least 2 qubits");
      if (config.s < 0) throw ParameterError("plan s must be nonnegative");
      if (!(config.plan_delta > 0 && config.plan_delta <= 1)) {
        throw ParameterError("plan_delta must lie in (0, 1]");
      }
      plan_method_from_name(config.plan_method);
      break;
    }
    case ExperimentKind::complex_recovery: {
      check_recovery_sweep(config, 0);
      if (2L * config.s > pair_count(config.n)) {
        throw ParameterError("complex recovery needs 2 s distinct qubit pairs");
      }
      break;
    }
  }
}

BootstrapInterval bootstrap_ci(const std::vector<double>& values, long resamples,
                               std::uint64_t seed) {
  if (values.empty()) throw ParameterError("bootstrap_ci: values must not be empty");
  if (resamples < 1) throw ParameterError("bootstrap_ci: resamples must be at least 1");
  Rng rng(seed);
  const std::size_t k = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (long r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t draw = 0; draw < k; ++draw) {
      sum += values[static_cast<std::size_t>(rng.uniform_below(k))];
    }
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(k);
  }
  std::sort(means.begin(), means.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  const double sample_mean = mean_of(values);
  BootstrapInterval interval;
  interval.lo = std::min(quantile(0.025), sample_mean);
  interval.hi = std::max(quantile(0.975), sample_mean);
  return interval;
}

double critical_m(const std::vector<long>& m_values, const std::vector<double>& mean_errors,
                  double threshold) {
  if (m_values.empty() || m_values.size() != mean_errors.size()) {
    throw ParameterError("critical_m: need one mean error per m value");
  }
  if (!(threshold > 0)) throw ParameterError("critical_m: threshold must be positive");
  if (mean_errors.front() < threshold) return static_cast<double>(m_values.front());
  for (std::size_t k = 1; k < m_values.size(); ++k) {
    if (!(mean_errors[k] < threshold)) continue;
    const double e0 = mean_errors[k - 1];
    const double e1 = mean_errors[k];
    const double m0 = static_cast<double>(m_values[k - 1]);
    const double m1 = static_cast<double>(m_values[k]);
    if (!std::isfinite(e0)) return m1;  // crossing out of a row with no survivors
    return m0 + (m1 - m0) * (e0 - threshold) / (e0 - e1);
  }
  return nan_value();
}

PhaseTransitionResult run_phase_transition(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.kind = ExperimentKind::phase_transition;
  validate_config(checked);
  const std::vector<double> sigmas{0.0};
  const std::vector<CellOutcome> cells = recovery_sweep_cells(checked, sigmas, false);
  SweepTables tables = aggregate_sweep(checked, sigmas, cells);
  PhaseTransitionResult result;
  result.rows = std::move(tables.rows);
  result.m_c = tables.group_m_c.front();
  result.csv = sweep_csv(checked, result.rows, &tables.row_m_c);
  return result;
}

NoiseSweepResult run_noise_sweep(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.kind = ExperimentKind::noise_sweep;
  validate_config(checked);
  const std::vector<CellOutcome> cells =
      recovery_sweep_cells(checked, checked.sigma_values, true);
  SweepTables tables = aggregate_sweep(checked, checked.sigma_values, cells);

  NoiseSweepResult result;
  result.rows = std::move(tables.rows);
  result.csv = sweep_csv(checked, result.rows, &tables.row_m_c);

  const long m_count = static_cast<long>(checked.m_values.size());
  const std::size_t smallest_sigma = static_cast<std::size_t>(
      std::min_element(checked.sigma_values.begin(), checked.sigma_values.end()) -
      checked.sigma_values.begin());
  result.m_c = tables.group_m_c[smallest_sigma];

  // Error against noise strength at the largest m, on log-log axes.
  std::vector<double> log_sigma;
  std::vector<double> log_error;
  for (std::size_t si = 0; si < checked.sigma_values.size(); ++si) {
    const double sigma = checked.sigma_values[si];
    const double err =
        result.rows[si * static_cast<std::size_t>(m_count) +
                    static_cast<std::size_t>(m_count - 1)]
            .err_inf;
    if (sigma > 0 && std::isfinite(err) && err > 0) {
      log_sigma.push_back(std::log(sigma));
      log_error.push_back(std::log(err));
    }
  }
  result.slope = fit_line(log_sigma, log_error).slope;
  return result;
}

SpamExperimentResult run_spam_experiment(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.kind = ExperimentKind::spam;
  validate_config(checked);
  const int n = checked.n;

  // Nearest-neighbor correlated dephasing: unit-scale diagonal with quarter-
  // strength couplings keeps the matrix positive definite for every n.
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    v(i, i) = checked.gamma0;
    if (i + 1 < n) v(i, i + 1) = v(i + 1, i) = checked.gamma0 / 4.0;
  }
  const NoiseModel model = NoiseModel::real(v);
  const Eigen::VectorXi a = Eigen::VectorXi::Zero(n);
  const Eigen::VectorXi b = Eigen::VectorXi::Ones(n);
  const double gamma_true = decay_rate(model, b - a);

  std::vector<double> times(static_cast<std::size_t>(checked.curve_points));
  const double t_max = checked.time_span / gamma_true;
  for (long k = 0; k < checked.curve_points; ++k) {
    times[static_cast<std::size_t>(k)] =
        t_max * static_cast<double>(k) / static_cast<double>(checked.curve_points - 1);
  }

  const Eigen::MatrixXcd projector = superposition_projector(a, b);

  struct SeedOutcome {
    SpamFitRow row;
    std::vector<double> curve;
  };
  const long deltas = static_cast<long>(checked.spam_deltas.size());
  std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(deltas * checked.spam_seeds));

  run_parallel(deltas * checked.spam_seeds, checked.threads, [&](long index) {
    const long di = index / checked.spam_seeds;
    const long k = index % checked.spam_seeds;
    const double delta = checked.spam_deltas[static_cast<std::size_t>(di)];
    const std::uint64_t channel_seed =
        Rng::derive_seed(checked.master_seed, kSpamStream, static_cast<std::uint64_t>(k));
    const SpamChannelPair channels = random_spam_channels(n, delta, channel_seed);
    SeedOutcome& out = outcomes[static_cast<std::size_t>(index)];
    out.curve = spam_decay_curve(model, channels, a, b, times);
    const DecayFit fit = fit_decay(times, out.curve);
    const SpamNorms norms = spam_perturbation_norms(channels, projector, projector);
    out.row.delta = delta;
    out.row.channel_seed = channel_seed;
    out.row.rate = fit.rate;
    out.row.gamma_true = gamma_true;
    out.row.rel_deviation = std::abs(fit.rate - gamma_true) / gamma_true;
    out.row.eps_s = norms.eps_s;
    out.row.eps_m = norms.eps_m;
    out.row.converged = fit.converged;
  });

  SpamExperimentResult result;
  result.gamma_true = gamma_true;
  result.csv = config_header(checked);
  result.csv += "# gamma_true: " + format_double(gamma_true) + "\n";
  for (long di = 0; di < deltas; ++di) {
    const SeedOutcome& first = outcomes[static_cast<std::size_t>(di * checked.spam_seeds)];
    result.csv +=
        "# delta: " + format_double(checked.spam_deltas[static_cast<std::size_t>(di)]) + "\n";
    result.csv += "t,p_tilde,p_noiseless\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double noiseless = 0.5 * (1.0 + std::exp(-gamma_true * times[k]));
      append_double(result.csv, times[k], ',');
      append_double(result.csv, first.curve[k], ',');
      append_double(result.csv, noiseless, '\n');
    }
  }
  result.csv += "\ndelta,channel_seed,rate,gamma_true,rel_deviation,eps_s,eps_m,converged\n";
  result.fits.reserve(outcomes.size());
  for (const SeedOutcome& out : outcomes) {
    result.fits.push_back(out.row);
    append_double(result.csv, out.row.delta, ',');
    result.csv += std::to_string(out.row.channel_seed);
    result.csv += ',';
    append_double(result.csv, out.row.rate, ',');
    append_double(result.csv, out.row.gamma_true, ',');
    append_double(result.csv, out.row.rel_deviation, ',');
    append_double(result.csv, out.row.eps_s, ',');
    append_double(result.csv, out.row.eps_m, ',');
    result.csv += out.row.converged ? "1\n" : "0\n";
  }
  return result;
}

RamseySampler decay_sampler(double gamma, double tau0, long s_clamp) {
  if (!(gamma >= 0) || !std::isfinite(gamma)) {
    throw ParameterError("decay_sampler: gamma must be finite and nonnegative");
  }
  if (!(tau0 > 0) || !std::isfinite(tau0)) {
    throw ParameterError("decay_sampler: tau0 must be positive");
  }
  if (s_clamp < 1) throw ParameterError("decay_sampler: clamp must be positive");
  // The walk only ever visits t = tau0 * 2^s with |s| <= s_clamp, so the
  // survival probability is cached per exponent.
  auto cache = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(2 * s_clamp + 1), -1.0);
  return [gamma, tau0, s_clamp, cache](double t, Rng& rng) {
    const int s = std::ilogb(t / tau0);
    double& p = cache->at(static_cast<std::size_t>(s + s_clamp));
    if (p < 0) p = 0.5 * (1.0 + std::exp(-gamma * t));
    return rng.bernoulli(p);
  };
}

TimeChooserResult run_time_chooser_map(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.kind = ExperimentKind::time_chooser;
  validate_config(checked);

  const long walks = walk_trials_for(checked.walk_delta, checked.walk_eps, checked.walk);
  const long s_clamp = static_cast<long>(std::ceil(checked.chooser_h)) + 64;
  const long columns = 2L * checked.exponent_range + 1;
  const long steps_count = static_cast<long>(checked.step_values.size());

  TimeChooserResult result;
  result.cells.resize(static_cast<std::size_t>(columns * steps_count));

  run_parallel(columns * steps_count, checked.threads, [&](long index) {
    const long ei = index / steps_count;
    const long si = index % steps_count;
    const int exponent = static_cast<int>(ei) - checked.exponent_range;
    const long n_steps = checked.step_values[static_cast<std::size_t>(si)];
    const double gamma = std::exp2(static_cast<double>(exponent)) / checked.tau0;
    const RamseySampler sampler = decay_sampler(gamma, checked.tau0, s_clamp);
    Rng rng = Rng::derive(checked.master_seed, kWalkStream, static_cast<std::uint64_t>(index));
    long hits = 0;
    for (long rep = 0; rep < checked.repetitions; ++rep) {
      double xi_sum = 0.0;
      for (long w = 0; w < walks; ++w) {
        xi_sum +=
            static_cast<double>(walk_endpoint(sampler, checked.tau0, n_steps, s_clamp, rng));
      }
      const double t_hat =
          checked.tau0 * std::exp2(xi_sum / static_cast<double>(walks));
      const double gt = gamma * t_hat;
      if (gt > 0.5 && gt < 2.0) ++hits;
    }
    TimeChooserCell& cell = result.cells[static_cast<std::size_t>(index)];
    cell.exponent = exponent;
    cell.n_steps = n_steps;
    cell.success = static_cast<double>(hits) / static_cast<double>(checked.repetitions);
  });

  // Least walk length reaching 90% success, per initial-guess mismatch.
  std::vector<double> fit_x;
  std::vector<double> fit_y;
  for (long ei = 0; ei < columns; ++ei) {
    const int exponent = static_cast<int>(ei) - checked.exponent_range;
    long boundary = -1;
    for (long si = 0; si < steps_count; ++si) {
      const TimeChooserCell& cell = result.cells[static_cast<std::size_t>(ei * steps_count + si)];
      if (cell.success >= 0.9) {
        boundary = cell.n_steps;
        break;
      }
    }
    result.boundary_exponents.push_back(exponent);
    result.boundary_steps.push_back(boundary);
    if (boundary >= 0) {
      fit_x.push_back(std::abs(static_cast<double>(exponent)));
      fit_y.push_back(static_cast<double>(boundary));
    }
  }
  result.boundary_r2 = fit_line(fit_x, fit_y).r2;

  result.csv = config_header(checked);
  result.csv += "exponent,n_steps,success\n";
  for (const TimeChooserCell& cell : result.cells) {
    append_long(result.csv, cell.exponent, ',');
    append_long(result.csv, cell.n_steps, ',');
    append_double(result.csv, cell.success, '\n');
  }
  result.csv += "\nexponent,boundary_steps\n";
  for (std::size_t k = 0; k < result.boundary_steps.size(); ++k) {
    append_long(result.csv, result.boundary_exponents[k], ',');
    append_long(result.csv, result.boundary_steps[k], '\n');
  }
  result.csv += "# boundary_r2: " + format_double(result.boundary_r2) + "\n";
  return result;
}

PlanMethod plan_method_from_name(const std::string& name) {
  if (name == kPlanMethodNames[0]) return PlanMethod::naive;
  if (name == kPlanMethodNames[1]) return PlanMethod::cs_rip;
  if (name == kPlanMethodNames[2]) return PlanMethod::cs_ripless;
  throw ParameterError("unknown plan method \"" + name + "\"");
}

std::string plan_method_name(PlanMethod method) {
  switch (method) {
    case PlanMethod::naive: return kPlanMethodNames[0];
    case PlanMethod::cs_rip: return kPlanMethodNames[1];
    case PlanMethod::cs_ripless: return kPlanMethodNames[2];
  }
  throw ParameterError("unknown plan method");
}

SamplePlan sample_complexity_plan(int n, int s, double delta, PlanMethod method) {
  if (n < 2) throw ParameterError("sample_complexity_plan: n must be at least 2");
  if (s < 0) throw ParameterError("sample_complexity_plan: s must be nonnegative");
  if (!(delta > 0 && delta <= 1)) {
    throw ParameterError("sample_complexity_plan: delta must lie in (0, 1]");
  }
  const double nd = n;
  const double sd = s;
  const double d2 = delta * delta;
  const double ln_n = std::log(nd);
  const double mx = std::max(nd, sd);

  const auto stage = [](double settings, double samples) {
    PlanStage st;
    st.settings = settings;
    st.samples_per_setting = samples;
    st.total = settings * samples;
    return st;
  };

  SamplePlan plan;
  plan.method = method;
  plan.n = n;
  plan.s = s;
  plan.delta = delta;
  switch (method) {
    case PlanMethod::naive:
      plan.single_qubit = stage(nd, nd / d2);
      plan.multi_qubit = stage(nd * nd, nd / d2);
      plan.crossover_condition = false;
      break;
    case PlanMethod::cs_rip:
      plan.single_qubit = stage(nd, nd / d2);
      plan.multi_qubit = stage(sd * std::pow(ln_n, 4.0), mx / d2);
      plan.crossover_condition = sd <= std::pow(nd, 1.5) / (ln_n * ln_n);
      break;
    case PlanMethod::cs_ripless:
      plan.single_qubit = stage(nd, std::pow(sd, 3.0) * std::pow(ln_n, 6.0) / d2);
      plan.multi_qubit =
          stage(sd * ln_n, sd * sd * mx * std::pow(ln_n, 5.0) / d2);
      plan.crossover_condition = sd <= std::pow(nd, 2.0 / 3.0) / (ln_n * ln_n);
      break;
  }
  plan.total = plan.single_qubit.total + plan.multi_qubit.total;
  plan.naive_total = nd * nd / d2 + nd * nd * nd / d2;
  plan.beats_naive = plan.total < plan.naive_total;
  return plan;
}

std::string plan_to_csv(const SamplePlan& plan) {
  std::string csv;
  csv += "# method: " + plan_method_name(plan.method) + "\n";
  csv += "# n: " + std::to_string(plan.n) + "\n";
  csv += "# s: " + std::to_string(plan.s) + "\n";
  csv += "# delta: " + format_double(plan.delta) + "\n";
  csv += "# naive_total: " + format_double(plan.naive_total) + "\n";
  csv += std::string("# beats_naive: ") + (plan.beats_naive ? "1" : "0") + "\n";
  csv += std::string("# crossover_condition: ") + (plan.crossover_condition ? "1" : "0") + "\n";
  csv += "stage,settings,samples_per_setting,total\n";
  const auto row = [&](const char* name, const PlanStage& st) {
    csv += name;
    csv += ',';
    append_double(csv, st.settings, ',');
    append_double(csv, st.samples_per_setting, ',');
    append_double(csv, st.total, '\n');
  };
  row("single", plan.single_qubit);
  row("multi", plan.multi_qubit);
  csv += "overall,,,";
  append_double(csv, plan.total, '\n');
  return csv;
}

ComplexRecoveryResult run_complex_recovery(const ExperimentConfig& config) {
  ExperimentConfig checked = config;
  checked.kind = ExperimentKind::complex_recovery;
  validate_config(checked);
  const int n = checked.n;
  const long m_count = static_cast<long>(checked.m_values.size());
  const long m_max = checked.m_values.back();
  std::vector<CellOutcome> cells(static_cast<std::size_t>(checked.instances * m_count));

  run_parallel(checked.instances, checked.threads, [&](long instance) {
    // Plant s skew couplings and s symmetric frequency shifts on disjoint
    // random pairs; the damping part stays diagonal.
    Rng model_rng = Rng::derive(checked.master_seed, kModelStream,
                                static_cast<std::uint64_t>(instance));
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(pair_count(n)));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
    }
    model_rng.shuffle(pairs);
    NoiseModel model;
    model.n = n;
    model.V = 2.0 * Eigen::MatrixXd::Identity(n, n);
    model.T = Eigen::MatrixXd::Zero(n, n);
    model.R = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < checked.s; ++k) {
      const auto [i, j] = pairs[static_cast<std::size_t>(k)];
      const double v = model_rng.bernoulli(0.5) ? 0.4 : -0.4;
      model.T(i, j) = v;
      model.T(j, i) = -v;
    }
    for (int k = 0; k < checked.s; ++k) {
      const auto [i, j] = pairs[static_cast<std::size_t>(checked.s + k)];
      const double v = model_rng.bernoulli(0.5) ? 0.3 : -0.3;
      model.R(i, j) = v;
      model.R(j, i) = v;
    }

    const SensingEnsemble ensemble = draw_ensemble(
        n, m_max,
        Rng::derive_seed(checked.master_seed, kEnsembleStream,
                         static_cast<std::uint64_t>(instance)));
    Eigen::VectorXd omega(m_max);
    Eigen::MatrixXd rows(m_max, 2 * pair_count(n));
    for (long j = 0; j < m_max; ++j) {
      const Probe& probe = ensemble.probes[static_cast<std::size_t>(j)];
      omega[j] = complex_rates(model, probe.alpha(), probe.beta()).omega;
      rows.row(j) = complex_probe_row(probe.alpha(), probe.beta());
    }
    const Eigen::MatrixXd gram_full = rows * rows.transpose();

    Eigen::VectorXd warm;
    SensingEnsemble prefix;
    prefix.n = n;
    prefix.master_seed = ensemble.master_seed;
    for (long mi = 0; mi < m_count; ++mi) {
      const long m = checked.m_values[static_cast<std::size_t>(mi)];
      prefix.probes.assign(ensemble.probes.begin(), ensemble.probes.begin() + m);
      const Eigen::MatrixXd gram = gram_full.topLeftCorner(m, m);
      RecoveryOptions opts;
      opts.solver = checked.solver;
      opts.solver.gram = &gram;
      opts.solver.warm_start = warm.size() > 0 ? &warm : nullptr;

      CellOutcome& cell = cells[static_cast<std::size_t>(instance * m_count + mi)];
      const StageTimer timer(checked.include_measured_runtime);
      try {
        const ComplexRecovery rec = recover_complex(omega.head(m), prefix, 0.0, opts);
        cell.failed = !rec.diag.converged;
        if (!cell.failed) {
          const ErrorMetrics err_t = matrix_errors(rec.T - model.T);
          const ErrorMetrics err_r = matrix_errors(rec.R - model.R);
          cell.err.inf = std::max(err_t.inf, err_r.inf);
          cell.err.fro = std::hypot(err_t.fro, err_r.fro);
          cell.err.l1 = err_t.l1 + err_r.l1;
          warm.resize(2 * pair_count(n));
          warm << uvec(rec.T), 2.0 * uvec(rec.R);
        }
      } catch (const SolverError&) {
        cell.failed = true;
      }
      cell.seconds = timer.seconds();
    }
  });

  ComplexRecoveryResult result;
  result.rows.reserve(static_cast<std::size_t>(m_count));
  for (long mi = 0; mi < m_count; ++mi) {
    std::vector<const CellOutcome*> column;
    column.reserve(static_cast<std::size_t>(checked.instances));
    for (long instance = 0; instance < checked.instances; ++instance) {
      column.push_back(&cells[static_cast<std::size_t>(instance * m_count + mi)]);
    }
    result.rows.push_back(aggregate_row(
        checked, checked.m_values[static_cast<std::size_t>(mi)], 0.0, mi, column));
  }
  result.csv = sweep_csv(checked, result.rows, nullptr);
  return result;
}

}  // namespace corrsense
