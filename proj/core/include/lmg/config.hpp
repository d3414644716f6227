#pragma once

// Experiment configuration and its JSON form. Every physical quantity in the
// file carries its unit in the key name (omega0_mhz_over_2pi, tf_ns, t1_us, ...);
// in memory everything is rad/ns and ns.

#include "lmg/dynamics.hpp"
#include "lmg/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmg {

enum class ModelKind { EffectiveDicke, EffectiveFull, CircuitQed };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

// Thrown for malformed or inconsistent configs; `field` is the dotted JSON path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// "paper": six-qubit device preset. "homogeneous": identical qubits built
// from xi and detuning. "custom": every field given explicitly.
struct DeviceChoice {
  std::string preset = "paper";
  double xi = units::mhz(20.0);
  double detuning = units::mhz(-106.5);
  std::optional<DeviceSpec> custom;

  DeviceSpec build(int n_qubits) const;
};

struct FringeRequest {
  bool enabled = false;
  int beta_points = 25;
  std::vector<double> times;  // checkpoints that get a full C(beta) curve
};

struct WignerRequest {
  bool enabled = false;
  std::vector<double> times;
  int n_theta = 61;
  int n_phi = 121;
  bool normalized = true;
};

struct SpectrumRequest {
  bool enabled = false;
  double omega_over_lambda_max = 3.0;
  int points = 61;
};

struct PairSwapRequest {
  bool enabled = false;
  int qubit_a = 1;  // zero-based; the reference qubit whose xi is known
  int qubit_b = 4;
  std::vector<double> operating_points;  // rad/ns
  double duration = 1000.0;
  double dt = 0.01;
  double sample_spacing = 1.0;
};

struct ObservableRequests {
  bool populations = true;
  bool correlations = true;
  bool ghz_fidelity = true;
  bool adiabaticity = false;
  bool readout_error = false;
  FringeRequest fringes;
  WignerRequest wigner;
  SpectrumRequest spectrum;
  PairSwapRequest pair_swap;
};

struct ExperimentConfig {
  std::string name = "custom";
  ModelKind model = ModelKind::EffectiveDicke;
  int n_qubits = 6;
  QuenchSchedule schedule;
  // Uniform coupling for effective models without a device.
  double lambda = units::mhz(3.8);
  std::optional<DeviceChoice> device;
  int n_max = 3;
  NoiseSpec noise;
  IntegratorConfig integrator{kDefaultEffectiveDt, uniform_checkpoints(150.0, 2.0)};
  ObservableRequests observables;
  std::string output_dir;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // lambda for effective models: |mean pair coupling| of the device if one is
  // given, the explicit value otherwise.
  double effective_lambda() const;
};

std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace lmg
