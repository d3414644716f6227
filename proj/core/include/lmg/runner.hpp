#pragma once

// Experiment orchestration: preset catalog, simulation dispatch and CSV/JSON
// output.

#include "lmg/config.hpp"
#include "lmg/dynamics.hpp"
#include "lmg/observables.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lmg {

// One output file: header row plus numeric rows.
struct CsvTable {
  std::string name;  // file name, e.g. "populations.csv"
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // Column lookup by name; throws std::out_of_range.
  std::size_t column(const std::string& column_name) const;
};

// 12 significant digits, '\n' line endings.
std::string format_csv(const CsvTable& table);
void write_csv(const CsvTable& table, const std::string& path);

struct SimulationResult {
  ExperimentConfig config;
  TrajectoryRecord trajectory;
  std::vector<CsvTable> tables;
  std::vector<std::string> warnings;

  const CsvTable& table(const std::string& name) const;
};

// Initial state |+>^N, quench, observables at every checkpoint. No files.
SimulationResult simulate(const ExperimentConfig& config);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string config_json;
  std::string code_version;
  std::string started_utc;
  double wall_seconds = 0.0;
  double norm_drift = 0.0;
  std::vector<std::string> warnings;
  std::vector<OutputFile> files;

  std::string to_json() const;
};

// simulate() plus one CSV per observable and manifest.json in `out_dir`
// (the config's output_dir when empty, then $LMG_OUT_DIR, then ./lmg-out).
RunManifest run(const ExperimentConfig& config, const std::string& out_dir = "");

std::string resolve_output_dir(const std::string& requested, const std::string& config_dir);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

// Per-checkpoint deltas (second minus first) of C2L, GHZ fidelity and P_n.
// Throws std::invalid_argument when schedules or checkpoint grids differ.
CsvTable compare_results(const SimulationResult& first, const SimulationResult& second);
CsvTable run_comparison(const ExperimentConfig& first, const ExperimentConfig& second,
                        const std::string& out_dir = "");

struct SwapFit {
  double frequency = 0.0;  // angular frequency of P(t), rad/ns
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
};

// Least-squares fit of c + A cos(w t) + B sin(w t) over w in [w_lo, w_hi],
// global scan followed by golden-section refinement.
SwapFit fit_oscillation(std::span<const double> times, std::span<const double> values,
                        double w_lo, double w_hi);

struct PairSwapResult {
  int qubit_a = 0;
  int qubit_b = 0;
  double omega_op = 0.0;
  double detuning = 0.0;  // omega_op - omega_b
  std::vector<double> times;
  std::vector<double> population_a;  // P(|e_a g_b>)
  std::vector<double> population_b;  // P(|g_a e_b>)
  SwapFit fit;
  double fitted_rate = 0.0;     // signed, rad/ns; half the population frequency
  double predicted_rate = 0.0;  // xi_a xi_b / detuning + b_ab
};

// |e_a g_b> (x) |0> under the two-qubit circuit-QED Hamiltonian with both
// qubits at omega_op and no drive. Throws if the point is not dispersive.
PairSwapResult run_pair_swap(const DeviceSpec& device, int qubit_a, int qubit_b, double omega_op,
                             double duration = 1000.0, double dt = 0.01,
                             double sample_spacing = 1.0);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit linear_regression(std::span<const double> x, std::span<const double> y);

// Fitted rate against xi_a / detuning across operating points: the slope
// estimates xi_b and the intercept the direct coupling b.
LineFit pair_swap_line(std::span<const PairSwapResult> results, const DeviceSpec& device);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);
std::string preset_description(const std::string& name);

}  // namespace lmg
