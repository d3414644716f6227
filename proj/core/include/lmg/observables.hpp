#pragma once

// Measured quantities: excitation populations, longitudinal and transverse
// correlations, the |e..e><g..g| coherence, fringe fits, GHZ fidelity, the
// multi-qubit spin Wigner function and a readout confusion channel.

#include "lmg/hilbert.hpp"
#include "lmg/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lmg {

// P_n^e for n = 0..N. SpinResonator states are reduced first.
std::vector<double> excitation_populations(const QuantumState& state);

// Probability of every computational basis string (length 2^N).
std::vector<double> bitstring_distribution(const QuantumState& state);

// Mean of <sigma_z^j sigma_z^k> over the N(N-1)/2 pairs.
double longitudinal_correlation(const QuantumState& state);

// <prod_j sigma_beta^j> - prod_j <sigma_beta^j>, sigma_beta = cos(b) X + sin(b) Y.
double transverse_correlation(const QuantumState& state, double beta);

// rho_{e..e; g..g}.
Complex coherence_element(const QuantumState& state);

struct FringeFit {
  double amplitude = 0.0;  // A >= 0 in A cos(N beta - gamma) + c
  double phase = 0.0;      // gamma in [-pi, pi)
  double offset = 0.0;
  double residual_rms = 0.0;
  // A / 2, i.e. |rho_{e..e;g..g}| under C = 2|rho| cos(N beta - gamma).
  double coherence_magnitude = 0.0;

  double visibility() const { return amplitude; }
};

// Linear least squares on {cos N beta, sin N beta, 1}.
FringeFit fringe_fit(std::span<const double> betas, std::span<const double> values, int n_qubits);

// `count` uniform points over [0, pi).
std::vector<double> default_beta_grid(int count = 25);

struct WignerGrid {
  std::vector<double> thetas;
  std::vector<double> phis;
  // values(i, k) at (thetas[i], phis[k]).
  Eigen::MatrixXd values;
  bool kernel_normalized = false;
};

std::vector<double> linspace_closed(double lo, double hi, int count);
std::vector<double> linspace_open(double lo, double hi, int count);

// Tr[rho U^N Pi U^dag N] with U = exp[-i theta/2 (sin phi X - cos phi Y)] on
// every qubit and Pi = prod_j (1 - sqrt(3) Z_j) (halved per qubit when
// `normalized`). Dicke states use the collective rotation; tensor-product
// states apply the rotated single-qubit kernel qubit by qubit.
WignerGrid wigner(const QuantumState& state, std::span<const double> thetas,
                  std::span<const double> phis, bool normalized);
double wigner_point(const QuantumState& state, double theta, double phi, bool normalized);
// Same quantity through the collective rotation exp(-i theta (sin phi Sx - cos phi Sy))
// followed by the diagonal kernel; valid for every qubit space.
double wigner_point_collective(const QuantumState& state, double theta, double phi,
                               bool normalized);

// Single-qubit rotation used by the Wigner function.
Eigen::Matrix2cd wigner_rotation(double theta, double phi);
// Applies the same 2x2 operator to every qubit of a FullSpin state.
QuantumState apply_to_every_qubit(const QuantumState& state, const Eigen::Matrix2cd& u);

struct GhzFidelity {
  double overlap = 0.0;          // <GHZ_gamma| rho |GHZ_gamma>
  double population_form = 0.0;  // (P_g..g + P_e..e)/2 + |rho_{e..e;g..g}|
  double gamma = 0.0;            // phase used for the overlap
};

// With no phase the overlap is maximized over gamma (gamma = arg rho_{e..e;g..g}).
GhzFidelity ghz_fidelity(const QuantumState& state, std::optional<double> gamma = std::nullopt);

// Per-qubit confusion [[F0, 1-F1], [1-F0, F1]] applied to a distribution over
// 2^N bit strings.
std::vector<double> apply_readout_error(std::span<const double> distribution,
                                        const DeviceSpec& device);

// P_n^e from a bit-string distribution.
std::vector<double> populations_from_distribution(std::span<const double> distribution,
                                                  int n_qubits);

}  // namespace lmg
