#pragma once

// Model Hamiltonians, the quench schedule, noise channels and the six-qubit
// device preset.

#include "lmg/hilbert.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace lmg {

namespace units {

// "2pi x f MHz" in rad/ns.
constexpr double mhz(double f_mhz) { return 2.0 * std::numbers::pi * f_mhz * 1e-3; }
// "2pi x f GHz" in rad/ns.
constexpr double ghz(double f_ghz) { return 2.0 * std::numbers::pi * f_ghz; }
constexpr double to_mhz(double rad_per_ns) { return rad_per_ns / (2.0 * std::numbers::pi * 1e-3); }
constexpr double us(double t_us) { return t_us * 1e3; }

}  // namespace units

struct DeviceSpec {
  int n_qubits = 0;
  std::vector<double> xi;       // qubit-resonator coupling, rad/ns
  double omega_b = 0.0;         // resonator
  double omega_o = 0.0;         // operation (drive) frequency
  double omega_q = 0.0;         // common qubit frequency at the operation point
  std::vector<double> t1;       // ns
  std::vector<double> t2;       // ns
  std::vector<double> f_g;      // P(read g | prepared g)
  std::vector<double> f_e;      // P(read e | prepared e)
  Eigen::MatrixXd crosstalk_b;  // XX coupling, rad/ns, symmetric, zero diagonal

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  double detuning() const { return omega_o - omega_b; }
  bool homogeneous_coupling(double tol = 1e-12) const;
};

struct QuenchSchedule {
  double omega0 = units::mhz(40.0);
  double tf = 60.0;
  double duration = 150.0;
  int drive_sign = +1;

  void validate() const;
};

struct NoiseSpec {
  bool enable_t1 = false;
  bool enable_dephasing = false;

  bool any() const { return enable_t1 || enable_dephasing; }
};

// lambda = xi^2 / |detuning|.
double effective_coupling(double xi, double detuning);

// sign * (omega Sx + lam Sz^2) on a Dicke or FullSpin space.
Operator lmg_hamiltonian(const HilbertSpace& space, double omega, double lam, int sign = +1);

// Rotating-frame swap Hamiltonian obtained by moving -lam Sz^2 into the frame
// of the drive: lam/2 [Sx^2 - cos(2 omega t)(Sz^2 - Sy^2) + sin(2 omega t)(Sz Sy + Sy Sz)].
Operator swap_frame_hamiltonian(const HilbertSpace& space, double omega, double lam, double t);

// Time-independent pieces of the circuit-QED Hamiltonian in the frame
// rotating at omega_o: H(Omega) = static_part + Omega * drive_part with
// drive_part = (1/2) sum_j sigma_x^j.
struct CircuitQedTerms {
  Operator static_part;
  Operator drive_part;
};

CircuitQedTerms circuit_qed_terms(const DeviceSpec& device, int n_max = 3);
Operator circuit_qed_hamiltonian(const DeviceSpec& device, double omega_drive, int n_max = 3);

// a^dagger a + sum_j |e><e|_j on a SpinResonator space.
Operator excitation_number_operator(const HilbertSpace& space);

// Omega0 exp(-tau / tf), zero once tau exceeds the schedule duration.
double quench_omega(double tau, const QuenchSchedule& schedule);

struct CollapseOperator {
  Operator op;  // already scaled by sqrt(rate)
  double rate;  // 1/ns
  std::string label;
};

struct LindbladSet {
  std::vector<CollapseOperator> ops;
  std::vector<std::string> warnings;
};

double pure_dephasing_rate(double t1, double t2);

LindbladSet lindblad_operators(const DeviceSpec& device, const NoiseSpec& noise,
                               const HilbertSpace& space);

// Mean over pairs of xi_j xi_k / Delta + b_jk (rad/ns, signed).
double mean_pair_coupling(const DeviceSpec& device);

// Six-qubit device of the experiment: couplings, coherence times and readout
// fidelities per qubit, resonator at 5.796 GHz, operation point 5.6895 GHz,
// XX crosstalk -0.27 MHz on every pair, qubit frequency set so that the
// linear Sz term cancels (omega_q = omega_o + |mean pair coupling|).
DeviceSpec paper_device_preset();

// Identical qubits with coupling xi at the given detuning (omega_o - omega_b);
// no crosstalk and omega_q = omega_o + xi^2/|detuning|.
DeviceSpec homogeneous_device(int n_qubits, double xi, double detuning);

}  // namespace lmg
