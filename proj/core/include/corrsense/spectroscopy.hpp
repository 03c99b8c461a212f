#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "corrsense/errors.hpp"
#include "corrsense/rng.hpp"

namespace corrsense {

// Outcome counts of repeated two-outcome interference shots at a fixed
// evolution time. P(+) = (1 + e^{-gamma t} cos(omega t)) / 2.
struct ShotCounts {
  long n_plus = 0;
  long n_minus = 0;
  double t = 0.0;
  long n_trials() const { return n_plus + n_minus; }
};

struct DecayEstimate {
  double gamma_hat = 0.0;
  double t_used = 0.0;
  long n_trials = 0;
  double delta_observed = 0.0;  // (n_plus - n_minus) / n_trials
};

ShotCounts sample_ramsey(double gamma, double omega, double t, long n_trials, Rng& rng);

// Log-inversion estimator gamma_hat = -ln(delta)/t. Returns nothing when the
// observed contrast is nonpositive; callers retry with more shots or less t.
std::optional<DecayEstimate> estimate_gamma(const ShotCounts& counts);

// Minimal shot count guaranteeing |delta_observed - E delta| <= delta with
// probability >= 1 - epsilon: smallest integer >= (2/delta^2) ln(2/epsilon).
long trials_for(double delta, double epsilon);

// Constants of the adaptive evolution-time random walk. mu converts the
// log-range h into a step count; K and c enter the endpoint-averaging trial
// count (they are not pinned by theory, only their roles are).
struct WalkConstants {
  double mu = 0.09;
  double K = 2.0;
  double c = 0.125;
};

// Probability of taking the "up" move after a "+" outcome: (e-1)/(e+1).
inline constexpr double kWalkUpProbability = 0.46211715726000974;

long walk_steps_for(double h, double eta, const WalkConstants& wc = {});
long walk_trials_for(double delta, double epsilon, const WalkConstants& wc = {});

// One Ramsey shot at evolution time t; true on a "+" outcome.
using RamseySampler = std::function<bool(double, Rng&)>;

// Runs one bounded random walk over exponents s (t = 2^s tau0) for n_steps
// moves and returns the final exponent. |s| is clamped at s_clamp.
long walk_endpoint(const RamseySampler& sampler, double tau0, long n_steps, long s_clamp,
                   Rng& rng);

// Full adaptive chooser: averages n_trials walk endpoints run for
// walk_steps_for(h, eta) moves each and returns t_hat = 2^xi tau0.
double choose_time(const RamseySampler& sampler, double tau0, double h, double eta,
                   long n_trials, Rng& rng, const WalkConstants& wc = {});

// One time point of a two-quadrature decay record: estimated P(+) in the
// standard basis and in the quarter-rotated basis.
struct ComplexSample {
  double t = 0.0;
  double p_plus = 0.0;
  double p_y = 0.0;
};

struct ComplexRateFit {
  double gamma = 0.0;
  double omega = 0.0;
  bool converged = false;
  long iterations = 0;
  double residual = 0.0;  // RMS misfit of both quadratures at the solution
};

// Damped-oscillation fit of both quadratures; needs >= 6 samples. Reports
// converged = false (with diagnostics populated) instead of throwing.
ComplexRateFit estimate_complex_rates(const std::vector<ComplexSample>& samples);

}  // namespace corrsense
