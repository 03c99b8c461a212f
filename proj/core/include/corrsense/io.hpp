#pragma once

#include <string>
#include <vector>

#include "corrsense/experiments.hpp"
#include "corrsense/noise_model.hpp"
#include "corrsense/recovery.hpp"
#include "corrsense/sensing.hpp"

namespace corrsense {

// Serialization of the domain types. All formats are plain JSON or CSV, and
// every floating-point value is written with just enough digits to parse
// back to the identical double, so save/load and rerun comparisons can be
// exact. Malformed input throws StructuralError (shape/content) or
// ParameterError (out-of-range values, unknown config keys).

/// Shortest decimal string that strtod parses back to exactly x.
std::string format_double(double x);

/// Sparse triplet format: {"n": ..., "real": [[i, j, value], ...],
/// "imag": [...], "lamb": [...]} holding diagonal and strictly-upper
/// entries; the symmetric/skew-symmetric completion happens on load.
std::string model_to_json(const NoiseModel& model);
NoiseModel model_from_json(const std::string& text);

/// {"n": ..., "m": ..., "seed": ..., "probes": [{"a": "0101", "b": ...}]}
/// with character k of each bit-string giving qubit k.
std::string ensemble_to_json(const SensingEnsemble& ensemble);
SensingEnsemble ensemble_from_json(const std::string& text);

/// Campaign with its noise metadata and any per-probe shot records.
std::string campaign_to_json(const Campaign& campaign);
Campaign campaign_from_json(const std::string& text);

/// CSV rows: probe_id, t, n_plus, n_minus, seed.
std::string shots_to_csv(const std::vector<ShotRecord>& shots);

/// Dense row-major matrix plus mode, residuals, iterations and flags.
std::string recovery_to_json(const RecoveryResult& result);

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

}  // namespace corrsense
