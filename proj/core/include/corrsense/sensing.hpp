#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "corrsense/noise_model.hpp"
#include "corrsense/rng.hpp"
#include "corrsense/spectroscopy.hpp"

namespace corrsense {

// Superposition probe |a> + |b> described by its two bitstrings.
struct Probe {
  Eigen::VectorXi a;
  Eigen::VectorXi b;
  Eigen::VectorXi r() const { return b - a; }
  Eigen::VectorXi alpha() const { return Eigen::VectorXi::Ones(a.size()) - 2 * a; }
  Eigen::VectorXi beta() const { return Eigen::VectorXi::Ones(b.size()) - 2 * b; }
};

struct SensingEnsemble {
  int n = 0;
  std::uint64_t master_seed = 0;
  std::vector<Probe> probes;
  long m() const { return static_cast<long>(probes.size()); }
};

// Uniform over pairs of distinct bitstrings (a = b draws are resampled).
Probe draw_probe(int n, Rng& rng);
SensingEnsemble draw_ensemble(int n, long m, std::uint64_t seed);

// Decay rates 2 r^T C r of every probe in the ensemble (real models).
Eigen::VectorXd apply_sensing(const NoiseModel& model, const SensingEnsemble& ensemble);

// Row j is 4 * uvec(r r^T): the linear functional on uvec(C') realized by
// probe j. Together with the diagonal rows 2 r_i^2 it decomposes
// apply_sensing(C) = diag_rows * diag(C) + rows * uvec(C).
Eigen::MatrixXd sensing_matrix(const SensingEnsemble& ensemble);
Eigen::MatrixXd diag_sensing_matrix(const SensingEnsemble& ensemble);

enum class NoiseMode { exact, gaussian, shot };

// Evolution-time policy for shot-mode campaigns: "oracle" places each probe
// at gamma * t = 1 using the true rate (isolates estimator statistics);
// "adaptive" runs the random-walk chooser first.
enum class TimeRule { oracle, adaptive };

struct NoiseSpec {
  NoiseMode mode = NoiseMode::exact;
  double sigma_eps = 0.0;  // gaussian mode: additive noise scale on h
  double delta1 = 0.05;    // shot mode: contrast accuracy, diagonal entries
  double delta2 = 0.05;    // shot mode: contrast accuracy, pair entries
  double epsilon_shot = 0.05;  // shot mode: per-entry failure budget
  TimeRule time_rule = TimeRule::oracle;
  double tau0 = 1.0;   // adaptive chooser: initial time guess
  double h = 8.0;      // adaptive chooser: promised log2 range of gamma*tau0
  double eta = -1.0;   // adaptive chooser: extra steps; negative means h/mu
  double walk_delta = 0.4;  // adaptive chooser: endpoint-average accuracy
  double walk_eps = 0.05;   // adaptive chooser: failure budget
  WalkConstants walk;
};

struct ShotRecord {
  long probe_id = 0;  // 0..n-1 diagonal, then n..n+m-1 ensemble probes
  double t = 0.0;
  long n_plus = 0;
  long n_minus = 0;
  std::uint64_t seed = 0;
};

struct Campaign {
  Eigen::VectorXd g;  // diagonal rate estimates, length n
  Eigen::VectorXd h;  // probe rate estimates, length m
  NoiseSpec noise;
  std::uint64_t master_seed = 0;
  std::vector<ShotRecord> shots;  // populated in shot mode only
};

// Measures g (fixed single-qubit probes) and h (the ensemble's probes) under
// the selected noise mode. Exact mode is deterministic and seed-independent;
// shot-mode entries that keep failing after the retry ladder raise
// EstimationError carrying the probe id.
Campaign simulate_campaign(const NoiseModel& model, const SensingEnsemble& ensemble,
                           const NoiseSpec& spec, std::uint64_t master_seed);

struct MomentReport {
  Eigen::VectorXd mean;        // empirical mean of q = 4 uvec(r r^T)
  Eigen::MatrixXd covariance;  // empirical second moment (mean is ~0)
  double max_sq_entry = 0.0;   // max over draws of ||q||_inf^2
  long samples = 0;
};

MomentReport isotropy_moments(int n, long samples, Rng& rng);

// Measurement row for the phase channel: the concatenation
// [uvec(alpha beta^T - beta alpha^T), uvec(beta beta^T - alpha alpha^T)],
// paired with the unknowns [uvec(T); 2 uvec(R)].
Eigen::VectorXd complex_probe_row(const Eigen::VectorXi& alpha, const Eigen::VectorXi& beta);

}  // namespace corrsense
