#include "lmg/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <fstream>
#include <sstream>

namespace lmg {

using nlohmann::json;

namespace {

constexpr double kTimeTol = 1e-9;

// Converted values are printed to 15 significant digits so that unit
// round trips do not leak ulp noise into the JSON.
std::string fmt_g15(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

double tidy(double x) { return std::stod(fmt_g15(x)); }

double out_mhz(double rad_per_ns) { return tidy(units::to_mhz(rad_per_ns)); }

double to_ghz(double rad_per_ns) { return tidy(units::to_mhz(rad_per_ns) * 1e-3); }

std::vector<double> tidy_list(std::vector<double> v) {
  for (double& x : v) x = tidy(x);
  return v;
}

std::vector<double> scaled(const std::vector<double>& v, double factor) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    out.push_back(x * factor);
  }
  return out;
}

std::vector<double> to_mhz_list(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    out.push_back(out_mhz(x));
  }
  return out;
}

std::vector<double> from_mhz_list(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    out.push_back(units::mhz(x));
  }
  return out;
}

// Reads obj[key] into `out` if present; type errors become ConfigError.
template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

template <typename T>
T require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(path + key, "missing required field");
  }
  T out{};
  read(obj, path, key, out);
  return out;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) {
    throw ConfigError(path.empty() ? "<root>" : path.substr(0, path.size() - 1),
                      "expected an object");
  }
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(path + item.key(), "unknown field");
    }
  }
}

bool contains_time(const std::vector<double>& grid, double t) {
  for (double g : grid) {
    if (std::abs(g - t) < kTimeTol) {
      return true;
    }
  }
  return false;
}

json device_to_json(const DeviceChoice& d) {
  json j;
  j["preset"] = d.preset;
  if (d.preset == "homogeneous") {
    j["xi_mhz_over_2pi"] = out_mhz(d.xi);
    j["detuning_mhz_over_2pi"] = out_mhz(d.detuning);
  } else if (d.preset == "custom" && d.custom) {
    const DeviceSpec& s = *d.custom;
    j["xi_mhz_over_2pi"] = to_mhz_list(s.xi);
    j["omega_b_ghz_over_2pi"] = to_ghz(s.omega_b);
    j["omega_o_ghz_over_2pi"] = to_ghz(s.omega_o);
    j["omega_q_ghz_over_2pi"] = to_ghz(s.omega_q);
    j["t1_us"] = tidy_list(scaled(s.t1, 1e-3));
    j["t2_us"] = tidy_list(scaled(s.t2, 1e-3));
    j["readout_f0"] = s.f_g;
    j["readout_f1"] = s.f_e;
    json rows = json::array();
    for (Index r = 0; r < s.crosstalk_b.rows(); ++r) {
      std::vector<double> row;
      for (Index c = 0; c < s.crosstalk_b.cols(); ++c) {
        row.push_back(out_mhz(s.crosstalk_b(r, c)));
      }
      rows.push_back(row);
    }
    j["crosstalk_mhz_over_2pi"] = rows;
  }
  return j;
}

DeviceChoice device_from_json(const json& j, int n_qubits) {
  const std::string p = "device.";
  DeviceChoice d;
  read(j, p, "preset", d.preset);
  if (d.preset == "paper") {
    reject_unknown(j, p, {"preset"});
  } else if (d.preset == "homogeneous") {
    reject_unknown(j, p, {"preset", "xi_mhz_over_2pi", "detuning_mhz_over_2pi"});
    d.xi = units::mhz(require<double>(j, p, "xi_mhz_over_2pi"));
    d.detuning = units::mhz(require<double>(j, p, "detuning_mhz_over_2pi"));
  } else if (d.preset == "custom") {
    reject_unknown(j, p,
                   {"preset", "xi_mhz_over_2pi", "omega_b_ghz_over_2pi", "omega_o_ghz_over_2pi",
                    "omega_q_ghz_over_2pi", "t1_us", "t2_us", "readout_f0", "readout_f1",
                    "crosstalk_mhz_over_2pi"});
    DeviceSpec s;
    s.n_qubits = n_qubits;
    s.xi = from_mhz_list(require<std::vector<double>>(j, p, "xi_mhz_over_2pi"));
    s.omega_b = units::ghz(require<double>(j, p, "omega_b_ghz_over_2pi"));
    s.omega_o = units::ghz(require<double>(j, p, "omega_o_ghz_over_2pi"));
    s.omega_q = units::ghz(require<double>(j, p, "omega_q_ghz_over_2pi"));
    s.t1 = scaled(require<std::vector<double>>(j, p, "t1_us"), 1e3);
    s.t2 = scaled(require<std::vector<double>>(j, p, "t2_us"), 1e3);
    const auto n = static_cast<std::size_t>(n_qubits);
    s.f_g = std::vector<double>(n, 1.0);
    s.f_e = std::vector<double>(n, 1.0);
    read(j, p, "readout_f0", s.f_g);
    read(j, p, "readout_f1", s.f_e);
    s.crosstalk_b = Eigen::MatrixXd::Zero(n_qubits, n_qubits);
    if (j.contains("crosstalk_mhz_over_2pi")) {
      const auto rows = require<std::vector<std::vector<double>>>(j, p, "crosstalk_mhz_over_2pi");
      if (rows.size() != n) {
        throw ConfigError(p + "crosstalk_mhz_over_2pi", "must be N x N");
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) {
          throw ConfigError(p + "crosstalk_mhz_over_2pi", "must be N x N");
        }
        for (std::size_t c = 0; c < n; ++c) {
          s.crosstalk_b(static_cast<Index>(r), static_cast<Index>(c)) = units::mhz(rows[r][c]);
        }
      }
    }
    d.custom = s;
  } else {
    throw ConfigError(p + "preset", "unknown device preset '" + d.preset +
                                        "' (expected paper, homogeneous or custom)");
  }
  return d;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::EffectiveDicke:
      return "effective_dicke";
    case ModelKind::EffectiveFull:
      return "effective_full";
    case ModelKind::CircuitQed:
      return "circuit_qed";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "effective_dicke") return ModelKind::EffectiveDicke;
  if (name == "effective_full") return ModelKind::EffectiveFull;
  if (name == "circuit_qed") return ModelKind::CircuitQed;
  throw ConfigError("model", "unknown model '" + name +
                                 "' (expected effective_dicke, effective_full or circuit_qed)");
}

DeviceSpec DeviceChoice::build(int n_qubits) const {
  DeviceSpec d;
  if (preset == "paper") {
    d = paper_device_preset();
    if (n_qubits != d.n_qubits) {
      throw ConfigError("device.preset", "paper device has 6 qubits, config asks for " +
                                             std::to_string(n_qubits));
    }
  } else if (preset == "homogeneous") {
    d = homogeneous_device(n_qubits, xi, detuning);
  } else if (preset == "custom") {
    if (!custom) {
      throw ConfigError("device", "custom preset without device fields");
    }
    d = *custom;
    if (d.n_qubits != n_qubits) {
      throw ConfigError("device", "device qubit count does not match n_qubits");
    }
  } else {
    throw ConfigError("device.preset", "unknown device preset '" + preset + "'");
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("device", e.what());
  }
  return d;
}

double ExperimentConfig::effective_lambda() const {
  if (device) {
    return std::abs(mean_pair_coupling(device->build(n_qubits)));
  }
  return lambda;
}

void ExperimentConfig::validate() const {
  const int max_qubits = model == ModelKind::EffectiveDicke ? 64 : 12;
  if (n_qubits < 1 || n_qubits > max_qubits) {
    throw ConfigError("n_qubits", "must lie in [1, " + std::to_string(max_qubits) + "] for " +
                                      to_string(model));
  }
  try {
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("schedule", e.what());
  }
  try {
    integrator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("integrator", e.what());
  }
  if (integrator.checkpoint_times.empty()) {
    throw ConfigError("integrator.checkpoints_ns", "at least one checkpoint required");
  }
  if (integrator.end_time() > schedule.duration + kTimeTol) {
    throw ConfigError("integrator.checkpoints_ns", "checkpoint beyond schedule duration");
  }

  std::optional<DeviceSpec> dev;
  if (device) {
    dev = device->build(n_qubits);
  }
  switch (model) {
    case ModelKind::EffectiveDicke:
      if (noise.any()) {
        throw ConfigError("noise", "effective_dicke cannot carry per-qubit noise");
      }
      if (dev && !dev->homogeneous_coupling()) {
        throw ConfigError("device", "effective_dicke needs homogeneous couplings");
      }
      break;
    case ModelKind::EffectiveFull:
      if (noise.any() && !dev) {
        throw ConfigError("noise", "noise needs a device for its coherence times");
      }
      if (dev && !dev->homogeneous_coupling()) {
        throw ConfigError("device", "effective_full uses a uniform coupling; device is inhomogeneous");
      }
      break;
    case ModelKind::CircuitQed:
      if (!dev) {
        throw ConfigError("device", "circuit_qed requires a device");
      }
      if (n_max < 1) {
        throw ConfigError("n_max", "must be >= 1");
      }
      break;
  }
  if (model != ModelKind::CircuitQed && effective_lambda() == 0.0) {
    throw ConfigError("lambda_mhz_over_2pi", "must be nonzero");
  }
  if (observables.readout_error && !dev) {
    throw ConfigError("observables.readout_error", "needs a device for readout fidelities");
  }
  const auto& fr = observables.fringes;
  if (fr.enabled && fr.beta_points < 3) {
    throw ConfigError("observables.fringes.beta_points", "at least 3 points needed for the fit");
  }
  for (double t : fr.times) {
    if (!contains_time(integrator.checkpoint_times, t)) {
      throw ConfigError("observables.fringes.times_ns", "time not on the checkpoint grid");
    }
  }
  const auto& w = observables.wigner;
  if (w.enabled && (w.n_theta < 1 || w.n_phi < 1)) {
    throw ConfigError("observables.wigner", "grid must be non-empty");
  }
  for (double t : w.times) {
    if (!contains_time(integrator.checkpoint_times, t)) {
      throw ConfigError("observables.wigner.times_ns", "time not on the checkpoint grid");
    }
  }
  const auto& sp = observables.spectrum;
  if (sp.enabled && (sp.points < 1 || !(sp.omega_over_lambda_max > 0.0))) {
    throw ConfigError("observables.spectrum", "need points >= 1 and a positive range");
  }
  if (observables.adiabaticity && (noise.any() || model == ModelKind::CircuitQed)) {
    throw ConfigError("observables.adiabaticity", "needs a closed effective model");
  }
  const auto& ps = observables.pair_swap;
  if (ps.enabled) {
    if (!dev) {
      throw ConfigError("observables.pair_swap", "needs a device");
    }
    if (ps.qubit_a == ps.qubit_b || ps.qubit_a < 0 || ps.qubit_b < 0 ||
        ps.qubit_a >= n_qubits || ps.qubit_b >= n_qubits) {
      throw ConfigError("observables.pair_swap.qubits", "two distinct valid qubit indices required");
    }
    if (ps.operating_points.empty()) {
      throw ConfigError("observables.pair_swap.operating_points_ghz_over_2pi",
                        "at least one operating point required");
    }
    if (!(ps.duration > 0.0) || !(ps.dt > 0.0) || !(ps.sample_spacing > 0.0)) {
      throw ConfigError("observables.pair_swap", "duration, dt and sample spacing must be > 0");
    }
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = to_string(c.model);
  j["n_qubits"] = c.n_qubits;
  j["schedule"] = {{"omega0_mhz_over_2pi", out_mhz(c.schedule.omega0)},
                   {"tf_ns", c.schedule.tf},
                   {"duration_ns", c.schedule.duration},
                   {"drive_sign", c.schedule.drive_sign}};
  j["lambda_mhz_over_2pi"] = out_mhz(c.lambda);
  if (c.device) {
    j["device"] = device_to_json(*c.device);
  }
  j["n_max"] = c.n_max;
  j["noise"] = {{"t1", c.noise.enable_t1}, {"dephasing", c.noise.enable_dephasing}};
  j["integrator"] = {{"dt_ns", c.integrator.dt},
                     {"checkpoints_ns", c.integrator.checkpoint_times}};
  const auto& o = c.observables;
  json obs;
  obs["populations"] = o.populations;
  obs["correlations"] = o.correlations;
  obs["ghz_fidelity"] = o.ghz_fidelity;
  obs["adiabaticity"] = o.adiabaticity;
  obs["readout_error"] = o.readout_error;
  obs["fringes"] = {{"enabled", o.fringes.enabled},
                    {"beta_points", o.fringes.beta_points},
                    {"times_ns", o.fringes.times}};
  obs["wigner"] = {{"enabled", o.wigner.enabled},
                   {"times_ns", o.wigner.times},
                   {"n_theta", o.wigner.n_theta},
                   {"n_phi", o.wigner.n_phi},
                   {"normalized", o.wigner.normalized}};
  obs["spectrum"] = {{"enabled", o.spectrum.enabled},
                     {"omega_over_lambda_max", o.spectrum.omega_over_lambda_max},
                     {"points", o.spectrum.points}};
  std::vector<double> ops;
  for (double w : o.pair_swap.operating_points) {
    ops.push_back(to_ghz(w));
  }
  obs["pair_swap"] = {{"enabled", o.pair_swap.enabled},
                      {"qubits", {o.pair_swap.qubit_a, o.pair_swap.qubit_b}},
                      {"operating_points_ghz_over_2pi", ops},
                      {"duration_ns", o.pair_swap.duration},
                      {"dt_ns", o.pair_swap.dt},
                      {"sample_spacing_ns", o.pair_swap.sample_spacing}};
  j["observables"] = obs;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(j, "", {"name", "model", "n_qubits", "schedule", "lambda_mhz_over_2pi", "device",
                         "n_max", "noise", "integrator", "observables", "output_dir", "seed"});
  ExperimentConfig c;
  read(j, "", "name", c.name);
  c.model = parse_model_kind(require<std::string>(j, "", "model"));
  c.n_qubits = require<int>(j, "", "n_qubits");
  c.integrator.dt = c.model == ModelKind::CircuitQed ? kDefaultFullModelDt : kDefaultEffectiveDt;

  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    reject_unknown(s, "schedule.", {"omega0_mhz_over_2pi", "tf_ns", "duration_ns", "drive_sign"});
    if (s.contains("omega0_mhz_over_2pi")) {
      c.schedule.omega0 = units::mhz(require<double>(s, "schedule.", "omega0_mhz_over_2pi"));
    }
    read(s, "schedule.", "tf_ns", c.schedule.tf);
    read(s, "schedule.", "duration_ns", c.schedule.duration);
    read(s, "schedule.", "drive_sign", c.schedule.drive_sign);
  }
  if (j.contains("lambda_mhz_over_2pi")) {
    c.lambda = units::mhz(require<double>(j, "", "lambda_mhz_over_2pi"));
  }
  if (j.contains("device") && !j["device"].is_null()) {
    c.device = device_from_json(j["device"], c.n_qubits);
  }
  read(j, "", "n_max", c.n_max);
  if (j.contains("noise")) {
    reject_unknown(j["noise"], "noise.", {"t1", "dephasing"});
    read(j["noise"], "noise.", "t1", c.noise.enable_t1);
    read(j["noise"], "noise.", "dephasing", c.noise.enable_dephasing);
  }
  if (j.contains("integrator")) {
    const json& in = j["integrator"];
    reject_unknown(in, "integrator.", {"dt_ns", "checkpoints_ns", "checkpoint_spacing_ns"});
    read(in, "integrator.", "dt_ns", c.integrator.dt);
    if (in.contains("checkpoints_ns") && in.contains("checkpoint_spacing_ns")) {
      throw ConfigError("integrator", "give checkpoints_ns or checkpoint_spacing_ns, not both");
    }
    if (in.contains("checkpoint_spacing_ns")) {
      const double spacing = require<double>(in, "integrator.", "checkpoint_spacing_ns");
      if (!(spacing > 0.0)) {
        throw ConfigError("integrator.checkpoint_spacing_ns", "must be > 0");
      }
      c.integrator.checkpoint_times = uniform_checkpoints(c.schedule.duration, spacing);
    }
    read(in, "integrator.", "checkpoints_ns", c.integrator.checkpoint_times);
  }
  if (j.contains("observables")) {
    const json& o = j["observables"];
    const std::string p = "observables.";
    reject_unknown(o, p, {"populations", "correlations", "ghz_fidelity", "adiabaticity",
                          "readout_error", "fringes", "wigner", "spectrum", "pair_swap"});
    auto& ob = c.observables;
    read(o, p, "populations", ob.populations);
    read(o, p, "correlations", ob.correlations);
    read(o, p, "ghz_fidelity", ob.ghz_fidelity);
    read(o, p, "adiabaticity", ob.adiabaticity);
    read(o, p, "readout_error", ob.readout_error);
    if (o.contains("fringes")) {
      const json& f = o["fringes"];
      reject_unknown(f, p + "fringes.", {"enabled", "beta_points", "times_ns"});
      ob.fringes.enabled = true;
      read(f, p + "fringes.", "enabled", ob.fringes.enabled);
      read(f, p + "fringes.", "beta_points", ob.fringes.beta_points);
      read(f, p + "fringes.", "times_ns", ob.fringes.times);
    }
    if (o.contains("wigner")) {
      const json& w = o["wigner"];
      reject_unknown(w, p + "wigner.", {"enabled", "times_ns", "n_theta", "n_phi", "normalized"});
      ob.wigner.enabled = true;
      read(w, p + "wigner.", "enabled", ob.wigner.enabled);
      read(w, p + "wigner.", "times_ns", ob.wigner.times);
      read(w, p + "wigner.", "n_theta", ob.wigner.n_theta);
      read(w, p + "wigner.", "n_phi", ob.wigner.n_phi);
      read(w, p + "wigner.", "normalized", ob.wigner.normalized);
    }
    if (o.contains("spectrum")) {
      const json& s = o["spectrum"];
      reject_unknown(s, p + "spectrum.", {"enabled", "omega_over_lambda_max", "points"});
      ob.spectrum.enabled = true;
      read(s, p + "spectrum.", "enabled", ob.spectrum.enabled);
      read(s, p + "spectrum.", "omega_over_lambda_max", ob.spectrum.omega_over_lambda_max);
      read(s, p + "spectrum.", "points", ob.spectrum.points);
    }
    if (o.contains("pair_swap")) {
      const json& s = o["pair_swap"];
      const std::string q = p + "pair_swap.";
      reject_unknown(s, q, {"enabled", "qubits", "operating_points_ghz_over_2pi", "duration_ns",
                            "dt_ns", "sample_spacing_ns"});
      ob.pair_swap.enabled = true;
      read(s, q, "enabled", ob.pair_swap.enabled);
      if (s.contains("qubits")) {
        const auto qs = require<std::vector<int>>(s, q, "qubits");
        if (qs.size() != 2) {
          throw ConfigError(q + "qubits", "exactly two qubit indices required");
        }
        ob.pair_swap.qubit_a = qs[0];
        ob.pair_swap.qubit_b = qs[1];
      }
      std::vector<double> ops;
      read(s, q, "operating_points_ghz_over_2pi", ops);
      ob.pair_swap.operating_points.clear();
      for (double g : ops) {
        ob.pair_swap.operating_points.push_back(units::ghz(g));
      }
      read(s, q, "duration_ns", ob.pair_swap.duration);
      read(s, q, "dt_ns", ob.pair_swap.dt);
      read(s, q, "sample_spacing_ns", ob.pair_swap.sample_spacing);
    }
  }
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "seed", c.seed);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("<file>", "cannot open config file " + path);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace lmg
