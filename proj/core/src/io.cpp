#include "corrsense/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <set>
#include <string>
#include <utility>

#include "corrsense/errors.hpp"
#include "json.hpp"

namespace corrsense {

namespace {

using nlohmann::json;

json parse_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw StructuralError(std::string(what) + ": not valid JSON");
  }
  return j;
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) {
    throw StructuralError(std::string(what) + ": expected a JSON object");
  }
}

// Rejects keys outside `allowed`; data files are strict so a typo cannot
// silently drop a field.
void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* what, bool as_parameter_error) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::string msg = std::string(what) + ": unknown key \"" + item.key() + "\"";
      if (as_parameter_error) throw ParameterError(msg);
      throw StructuralError(msg);
    }
  }
}

const json& require_key(const json& obj, const char* key, const char* what) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw StructuralError(std::string(what) + ": missing key \"" + key + "\"");
  }
  return *it;
}

long as_integer(const json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw StructuralError(std::string(what) + ": expected an integer");
  }
  return j.get<long>();
}

std::uint64_t as_seed(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw StructuralError(std::string(what) + ": expected a non-negative integer seed");
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) {
    throw StructuralError(std::string(what) + ": expected a number");
  }
  return j.get<double>();
}

double as_finite(const json& j, const char* what) {
  double v = as_number(j, what);
  if (!std::isfinite(v)) {
    throw StructuralError(std::string(what) + ": expected a finite number");
  }
  return v;
}

bool as_bool(const json& j, const char* what) {
  if (!j.is_boolean()) {
    throw StructuralError(std::string(what) + ": expected a boolean");
  }
  return j.get<bool>();
}

std::string as_string(const json& j, const char* what) {
  if (!j.is_string()) {
    throw StructuralError(std::string(what) + ": expected a string");
  }
  return j.get<std::string>();
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vector(const json& j, const char* what) {
  if (!j.is_array()) {
    throw StructuralError(std::string(what) + ": expected an array of numbers");
  }
  Eigen::VectorXd v(static_cast<long>(j.size()));
  long i = 0;
  for (const auto& e : j) v[i++] = as_finite(e, what);
  return v;
}

// Nonzero upper-triangular entries as [i, j, value] triplets, row by row.
json upper_triplets(const Eigen::MatrixXd& M, bool include_diagonal) {
  json arr = json::array();
  int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = include_diagonal ? i : i + 1; j < n; ++j) {
      if (M(i, j) != 0.0) arr.push_back(json::array({i, j, M(i, j)}));
    }
  }
  return arr;
}

enum class Completion { symmetric, skew };

void fill_from_triplets(const json& arr, Eigen::MatrixXd& M, Completion completion,
                        const char* section) {
  if (!arr.is_array()) {
    throw StructuralError(std::string("model ") + section + ": expected an array of triplets");
  }
  int n = static_cast<int>(M.rows());
  std::set<std::pair<int, int>> seen;
  for (const auto& entry : arr) {
    if (!entry.is_array() || entry.size() != 3) {
      throw StructuralError(std::string("model ") + section +
                            ": each entry must be [i, j, value]");
    }
    long i = as_integer(entry[0], section);
    long j = as_integer(entry[1], section);
    double v = as_finite(entry[2], section);
    if (i < 0 || j < 0 || i >= n || j >= n || i > j) {
      throw StructuralError(std::string("model ") + section +
                            ": indices must satisfy 0 <= i <= j < n");
    }
    if (completion == Completion::skew && i == j) {
      throw StructuralError(std::string("model ") + section +
                            ": diagonal entries are not allowed in the skew part");
    }
    if (!seen.insert({static_cast<int>(i), static_cast<int>(j)}).second) {
      throw StructuralError(std::string("model ") + section + ": duplicate entry (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    M(i, j) = v;
    if (i != j) M(j, i) = (completion == Completion::skew) ? -v : v;
  }
}

std::string bits_to_string(const Eigen::VectorXi& bits) {
  std::string s(static_cast<std::size_t>(bits.size()), '0');
  for (long k = 0; k < bits.size(); ++k) s[static_cast<std::size_t>(k)] = bits[k] ? '1' : '0';
  return s;
}

Eigen::VectorXi string_to_bits(const std::string& s, int n, const char* what) {
  if (static_cast<int>(s.size()) != n) {
    throw StructuralError(std::string(what) + ": bit-string length must equal n");
  }
  Eigen::VectorXi bits(n);
  for (int k = 0; k < n; ++k) {
    if (s[static_cast<std::size_t>(k)] != '0' && s[static_cast<std::size_t>(k)] != '1') {
      throw StructuralError(std::string(what) + ": bit-strings may contain only 0 and 1");
    }
    bits[k] = s[static_cast<std::size_t>(k)] == '1' ? 1 : 0;
  }
  return bits;
}

const char* noise_mode_name(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::exact: return "exact";
    case NoiseMode::gaussian: return "gaussian";
    case NoiseMode::shot: return "shot";
  }
  throw ParameterError("unknown noise mode");
}

NoiseMode noise_mode_from_name(const std::string& name) {
  if (name == "exact") return NoiseMode::exact;
  if (name == "gaussian") return NoiseMode::gaussian;
  if (name == "shot") return NoiseMode::shot;
  throw ParameterError("unknown noise mode \"" + name + "\"");
}

const char* time_rule_name(TimeRule rule) {
  switch (rule) {
    case TimeRule::oracle: return "oracle";
    case TimeRule::adaptive: return "adaptive";
  }
  throw ParameterError("unknown time rule");
}

TimeRule time_rule_from_name(const std::string& name) {
  if (name == "oracle") return TimeRule::oracle;
  if (name == "adaptive") return TimeRule::adaptive;
  throw ParameterError("unknown time rule \"" + name + "\"");
}

const char* recovery_mode_name(RecoveryMode mode) {
  switch (mode) {
    case RecoveryMode::naive: return "naive";
    case RecoveryMode::sequential: return "sequential";
    case RecoveryMode::simultaneous: return "simultaneous";
    case RecoveryMode::lasso: return "lasso";
  }
  throw ParameterError("unknown recovery mode");
}

constexpr std::array<std::pair<ExperimentKind, const char*>, 6> kKindNames{{
    {ExperimentKind::phase_transition, "phase-transition"},
    {ExperimentKind::noise_sweep, "noise-sweep"},
    {ExperimentKind::spam, "spam"},
    {ExperimentKind::time_chooser, "time-chooser"},
    {ExperimentKind::plan, "plan"},
    {ExperimentKind::complex_recovery, "complex"},
}};

const char* kind_name(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw ParameterError("unknown experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (name == n) return k;
  }
  throw ParameterError("unknown experiment kind \"" + name + "\"");
}

json walk_to_json(const WalkConstants& walk) {
  return json{{"mu", walk.mu}, {"K", walk.K}, {"c", walk.c}};
}

WalkConstants walk_from_json(const json& j, bool as_parameter_error) {
  require_object(j, "walk constants");
  reject_unknown_keys(j, {"mu", "K", "c"}, "walk constants", as_parameter_error);
  WalkConstants walk;
  if (j.contains("mu")) walk.mu = as_finite(j["mu"], "walk mu");
  if (j.contains("K")) walk.K = as_finite(j["K"], "walk K");
  if (j.contains("c")) walk.c = as_finite(j["c"], "walk c");
  return walk;
}

json noise_to_json(const NoiseSpec& spec) {
  return json{{"mode", noise_mode_name(spec.mode)},
              {"sigma_eps", spec.sigma_eps},
              {"delta1", spec.delta1},
              {"delta2", spec.delta2},
              {"epsilon_shot", spec.epsilon_shot},
              {"time_rule", time_rule_name(spec.time_rule)},
              {"tau0", spec.tau0},
              {"h", spec.h},
              {"eta", spec.eta},
              {"walk_delta", spec.walk_delta},
              {"walk_eps", spec.walk_eps},
              {"walk", walk_to_json(spec.walk)}};
}

NoiseSpec noise_from_json(const json& j) {
  require_object(j, "noise spec");
  reject_unknown_keys(j,
                      {"mode", "sigma_eps", "delta1", "delta2", "epsilon_shot", "time_rule",
                       "tau0", "h", "eta", "walk_delta", "walk_eps", "walk"},
                      "noise spec", /*as_parameter_error=*/false);
  NoiseSpec spec;
  if (j.contains("mode")) spec.mode = noise_mode_from_name(as_string(j["mode"], "noise mode"));
  if (j.contains("sigma_eps")) spec.sigma_eps = as_finite(j["sigma_eps"], "sigma_eps");
  if (j.contains("delta1")) spec.delta1 = as_finite(j["delta1"], "delta1");
  if (j.contains("delta2")) spec.delta2 = as_finite(j["delta2"], "delta2");
  if (j.contains("epsilon_shot")) {
    spec.epsilon_shot = as_finite(j["epsilon_shot"], "epsilon_shot");
  }
  if (j.contains("time_rule")) {
    spec.time_rule = time_rule_from_name(as_string(j["time_rule"], "time rule"));
  }
  if (j.contains("tau0")) spec.tau0 = as_finite(j["tau0"], "tau0");
  if (j.contains("h")) spec.h = as_finite(j["h"], "h");
  if (j.contains("eta")) spec.eta = as_finite(j["eta"], "eta");
  if (j.contains("walk_delta")) spec.walk_delta = as_finite(j["walk_delta"], "walk_delta");
  if (j.contains("walk_eps")) spec.walk_eps = as_finite(j["walk_eps"], "walk_eps");
  if (j.contains("walk")) spec.walk = walk_from_json(j["walk"], /*as_parameter_error=*/false);
  return spec;
}

json shot_to_json(const ShotRecord& shot) {
  return json{{"probe_id", shot.probe_id},
              {"t", shot.t},
              {"n_plus", shot.n_plus},
              {"n_minus", shot.n_minus},
              {"seed", shot.seed}};
}

ShotRecord shot_from_json(const json& j) {
  require_object(j, "shot record");
  reject_unknown_keys(j, {"probe_id", "t", "n_plus", "n_minus", "seed"}, "shot record",
                      /*as_parameter_error=*/false);
  ShotRecord shot;
  shot.probe_id = as_integer(require_key(j, "probe_id", "shot record"), "probe_id");
  shot.t = as_finite(require_key(j, "t", "shot record"), "t");
  shot.n_plus = as_integer(require_key(j, "n_plus", "shot record"), "n_plus");
  shot.n_minus = as_integer(require_key(j, "n_minus", "shot record"), "n_minus");
  shot.seed = as_seed(require_key(j, "seed", "shot record"), "seed");
  if (shot.n_plus < 0 || shot.n_minus < 0) {
    throw StructuralError("shot record: counts must be non-negative");
  }
  return shot;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string model_to_json(const NoiseModel& model) {
  json j{{"n", model.n},
         {"real", upper_triplets(model.V, /*include_diagonal=*/true)},
         {"imag", upper_triplets(model.T, /*include_diagonal=*/false)},
         {"lamb", upper_triplets(model.R, /*include_diagonal=*/true)}};
  return j.dump();
}

NoiseModel model_from_json(const std::string& text) {
  json j = parse_text(text, "model");
  require_object(j, "model");
  reject_unknown_keys(j, {"n", "real", "imag", "lamb"}, "model", /*as_parameter_error=*/false);
  long n = as_integer(require_key(j, "n", "model"), "model n");
  if (n < 1) throw ParameterError("model: n must be at least 1");
  NoiseModel model;
  model.n = static_cast<int>(n);
  model.V = Eigen::MatrixXd::Zero(n, n);
  model.T = Eigen::MatrixXd::Zero(n, n);
  model.R = Eigen::MatrixXd::Zero(n, n);
  if (j.contains("real")) fill_from_triplets(j["real"], model.V, Completion::symmetric, "real");
  if (j.contains("imag")) fill_from_triplets(j["imag"], model.T, Completion::skew, "imag");
  if (j.contains("lamb")) fill_from_triplets(j["lamb"], model.R, Completion::symmetric, "lamb");
  return model;
}

std::string ensemble_to_json(const SensingEnsemble& ensemble) {
  json probes = json::array();
  for (const Probe& probe : ensemble.probes) {
    probes.push_back(json{{"a", bits_to_string(probe.a)}, {"b", bits_to_string(probe.b)}});
  }
  json j{{"n", ensemble.n},
         {"m", ensemble.m()},
         {"seed", ensemble.master_seed},
         {"probes", std::move(probes)}};
  return j.dump();
}

SensingEnsemble ensemble_from_json(const std::string& text) {
  json j = parse_text(text, "ensemble");
  require_object(j, "ensemble");
  reject_unknown_keys(j, {"n", "m", "seed", "probes"}, "ensemble", /*as_parameter_error=*/false);
  long n = as_integer(require_key(j, "n", "ensemble"), "ensemble n");
  if (n < 1) throw ParameterError("ensemble: n must be at least 1");
  const json& probes = require_key(j, "probes", "ensemble");
  if (!probes.is_array()) throw StructuralError("ensemble: probes must be an array");
  if (j.contains("m") &&
      as_integer(j["m"], "ensemble m") != static_cast<long>(probes.size())) {
    throw StructuralError("ensemble: m does not match the number of probes");
  }
  SensingEnsemble ensemble;
  ensemble.n = static_cast<int>(n);
  ensemble.master_seed = j.contains("seed") ? as_seed(j["seed"], "ensemble seed") : 0;
  ensemble.probes.reserve(probes.size());
  for (const auto& p : probes) {
    require_object(p, "probe");
    reject_unknown_keys(p, {"a", "b"}, "probe", /*as_parameter_error=*/false);
    Probe probe;
    probe.a = string_to_bits(as_string(require_key(p, "a", "probe"), "probe a"),
                             ensemble.n, "probe a");
    probe.b = string_to_bits(as_string(require_key(p, "b", "probe"), "probe b"),
                             ensemble.n, "probe b");
    if (probe.a.cwiseEqual(probe.b).all()) {
      throw StructuralError("probe: the two bit-strings must differ");
    }
    ensemble.probes.push_back(std::move(probe));
  }
  return ensemble;
}

std::string campaign_to_json(const Campaign& campaign) {
  json shots = json::array();
  for (const ShotRecord& shot : campaign.shots) shots.push_back(shot_to_json(shot));
  json j{{"g", vector_to_json(campaign.g)},
         {"h", vector_to_json(campaign.h)},
         {"noise", noise_to_json(campaign.noise)},
         {"master_seed", campaign.master_seed},
         {"shots", std::move(shots)}};
  return j.dump();
}

Campaign campaign_from_json(const std::string& text) {
  json j = parse_text(text, "campaign");
  require_object(j, "campaign");
  reject_unknown_keys(j, {"g", "h", "noise", "master_seed", "shots"}, "campaign",
                      /*as_parameter_error=*/false);
  Campaign campaign;
  campaign.g = json_to_vector(require_key(j, "g", "campaign"), "campaign g");
  campaign.h = json_to_vector(require_key(j, "h", "campaign"), "campaign h");
  if (j.contains("noise")) campaign.noise = noise_from_json(j["noise"]);
  if (j.contains("master_seed")) {
    campaign.master_seed = as_seed(j["master_seed"], "campaign master_seed");
  }
  if (j.contains("shots")) {
    const json& shots = j["shots"];
    if (!shots.is_array()) throw StructuralError("campaign: shots must be an array");
    campaign.shots.reserve(shots.size());
    for (const auto& s : shots) campaign.shots.push_back(shot_from_json(s));
  }
  return campaign;
}

std::string shots_to_csv(const std::vector<ShotRecord>& shots) {
  std::string csv = "probe_id,t,n_plus,n_minus,seed\n";
  for (const ShotRecord& shot : shots) {
    csv += std::to_string(shot.probe_id);
    csv += ',';
    csv += format_double(shot.t);
    csv += ',';
    csv += std::to_string(shot.n_plus);
    csv += ',';
    csv += std::to_string(shot.n_minus);
    csv += ',';
    csv += std::to_string(shot.seed);
    csv += '\n';
  }
  return csv;
}

std::string recovery_to_json(const RecoveryResult& result) {
  json matrix = json::array();
  for (long i = 0; i < result.W.rows(); ++i) {
    for (long k = 0; k < result.W.cols(); ++k) matrix.push_back(result.W(i, k));
  }
  json j{{"n", result.W.rows()},
         {"matrix", std::move(matrix)},
         {"mode", recovery_mode_name(result.mode)},
         {"residual_h", result.residual_h},
         {"residual_g", result.residual_g},
         {"iterations", result.iterations},
         {"solver_converged", result.solver_converged},
         {"feasible", result.feasible},
         {"psd_projected", result.psd_projected}};
  return j.dump();
}

std::string config_to_json(const ExperimentConfig& config) {
  json solver{{"max_iterations", config.solver.max_iterations},
              {"tol_abs", config.solver.tol_abs},
              {"tol_rel", config.solver.tol_rel},
              {"rho0", config.solver.rho0},
              {"step_safety", config.solver.step_safety}};
  json j{{"kind", kind_name(config.kind)},
         {"n", config.n},
         {"s", config.s},
         {"m_values", config.m_values},
         {"sigma_values", config.sigma_values},
         {"instances", config.instances},
         {"master_seed", config.master_seed},
         {"out", config.out},
         {"threads", config.threads},
         {"include_measured_runtime", config.include_measured_runtime},
         {"solver", std::move(solver)},
         {"spam_deltas", config.spam_deltas},
         {"gamma0", config.gamma0},
         {"spam_seeds", config.spam_seeds},
         {"curve_points", config.curve_points},
         {"time_span", config.time_span},
         {"exponent_range", config.exponent_range},
         {"step_values", config.step_values},
         {"repetitions", config.repetitions},
         {"tau0", config.tau0},
         {"chooser_h", config.chooser_h},
         {"chooser_eta", config.chooser_eta},
         {"walk_delta", config.walk_delta},
         {"walk_eps", config.walk_eps},
         {"walk", walk_to_json(config.walk)},
         {"plan_delta", config.plan_delta},
         {"plan_method", config.plan_method}};
  return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = parse_text(text, "config");
  require_object(j, "config");
  reject_unknown_keys(j,
                      {"kind", "n", "s", "m_values", "sigma_values", "instances",
                       "master_seed", "out", "threads", "include_measured_runtime", "solver",
                       "spam_deltas", "gamma0", "spam_seeds", "curve_points", "time_span",
                       "exponent_range", "step_values", "repetitions", "tau0", "chooser_h",
                       "chooser_eta", "walk_delta", "walk_eps", "walk", "plan_delta",
                       "plan_method"},
                      "config", /*as_parameter_error=*/true);
  if (!j.contains("kind")) throw ParameterError("config: missing key \"kind\"");
  ExperimentConfig config;
  config.kind = kind_from_name(as_string(j["kind"], "config kind"));
  if (j.contains("n")) config.n = static_cast<int>(as_integer(j["n"], "config n"));
  if (j.contains("s")) config.s = static_cast<int>(as_integer(j["s"], "config s"));
  if (j.contains("m_values")) {
    const json& arr = j["m_values"];
    if (!arr.is_array()) throw StructuralError("config m_values: expected an array");
    config.m_values.clear();
    for (const auto& e : arr) config.m_values.push_back(as_integer(e, "config m_values"));
  }
  if (j.contains("sigma_values")) {
    config.sigma_values.clear();
    const json& arr = j["sigma_values"];
    if (!arr.is_array()) throw StructuralError("config sigma_values: expected an array");
    for (const auto& e : arr) {
      config.sigma_values.push_back(as_finite(e, "config sigma_values"));
    }
  }
  if (j.contains("instances")) config.instances = as_integer(j["instances"], "config instances");
  if (j.contains("master_seed")) config.master_seed = as_seed(j["master_seed"], "master_seed");
  if (j.contains("out")) config.out = as_string(j["out"], "config out");
  if (j.contains("threads")) {
    config.threads = static_cast<int>(as_integer(j["threads"], "config threads"));
  }
  if (j.contains("include_measured_runtime")) {
    config.include_measured_runtime =
        as_bool(j["include_measured_runtime"], "include_measured_runtime");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    require_object(s, "config solver");
    reject_unknown_keys(s, {"max_iterations", "tol_abs", "tol_rel", "rho0", "step_safety"},
                        "config solver", /*as_parameter_error=*/true);
    if (s.contains("max_iterations")) {
      config.solver.max_iterations = as_integer(s["max_iterations"], "solver max_iterations");
    }
    if (s.contains("tol_abs")) config.solver.tol_abs = as_finite(s["tol_abs"], "solver tol_abs");
    if (s.contains("tol_rel")) config.solver.tol_rel = as_finite(s["tol_rel"], "solver tol_rel");
    if (s.contains("rho0")) config.solver.rho0 = as_finite(s["rho0"], "solver rho0");
    if (s.contains("step_safety")) {
      config.solver.step_safety = as_finite(s["step_safety"], "solver step_safety");
    }
  }
  if (j.contains("spam_deltas")) {
    config.spam_deltas.clear();
    const json& arr = j["spam_deltas"];
    if (!arr.is_array()) throw StructuralError("config spam_deltas: expected an array");
    for (const auto& e : arr) config.spam_deltas.push_back(as_finite(e, "config spam_deltas"));
  }
  if (j.contains("gamma0")) config.gamma0 = as_finite(j["gamma0"], "config gamma0");
  if (j.contains("spam_seeds")) {
    config.spam_seeds = as_integer(j["spam_seeds"], "config spam_seeds");
  }
  if (j.contains("curve_points")) {
    config.curve_points = as_integer(j["curve_points"], "config curve_points");
  }
  if (j.contains("time_span")) config.time_span = as_finite(j["time_span"], "config time_span");
  if (j.contains("exponent_range")) {
    config.exponent_range = static_cast<int>(as_integer(j["exponent_range"], "exponent_range"));
  }
  if (j.contains("step_values")) {
    config.step_values.clear();
    const json& arr = j["step_values"];
    if (!arr.is_array()) throw StructuralError("config step_values: expected an array");
    for (const auto& e : arr) config.step_values.push_back(as_integer(e, "config step_values"));
  }
  if (j.contains("repetitions")) {
    config.repetitions = as_integer(j["repetitions"], "config repetitions");
  }
  if (j.contains("tau0")) config.tau0 = as_finite(j["tau0"], "config tau0");
  if (j.contains("chooser_h")) config.chooser_h = as_finite(j["chooser_h"], "config chooser_h");
  if (j.contains("chooser_eta")) {
    config.chooser_eta = as_finite(j["chooser_eta"], "config chooser_eta");
  }
  if (j.contains("walk_delta")) config.walk_delta = as_finite(j["walk_delta"], "walk_delta");
  if (j.contains("walk_eps")) config.walk_eps = as_finite(j["walk_eps"], "walk_eps");
  if (j.contains("walk")) config.walk = walk_from_json(j["walk"], /*as_parameter_error=*/true);
  if (j.contains("plan_delta")) config.plan_delta = as_finite(j["plan_delta"], "plan_delta");
  if (j.contains("plan_method")) config.plan_method = as_string(j["plan_method"], "plan_method");
  return config;
}

}  // namespace corrsense
