#pragma once

// Hilbert spaces, operators and states for N-qubit collective-spin models.
//
// Conventions used throughout the library:
//   * per-qubit basis order is (g, e); sigma_z = |e><e| - |g><g|
//   * qubit 0 is the most significant bit of a computational basis index,
//     so |g...g> has index 0 and |e...e> has index 2^N - 1
//   * Dicke basis is ordered m = -J .. +J, i.e. index k = m + J = number of
//     excited qubits
//   * SpinResonator spaces are qubits (x) photon, photon index fastest
//   * frequencies in rad/ns, times in ns (hbar = 1)

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class SpaceKind { Dicke, FullSpin, SpinResonator };

std::string to_string(SpaceKind kind);

class HilbertSpace {
 public:
  static HilbertSpace dicke(int n_qubits);
  static HilbertSpace full_spin(int n_qubits);
  static HilbertSpace spin_resonator(int n_qubits, int n_max = 3);

  SpaceKind kind() const { return kind_; }
  int n_qubits() const { return n_qubits_; }
  // Photon truncation; 0 for spaces without a resonator.
  int n_max() const { return n_max_; }
  Index dim() const;
  // Dimension of the qubit register alone (N+1 for Dicke, 2^N otherwise).
  Index qubit_dim() const;
  Index photon_dim() const { return kind_ == SpaceKind::SpinResonator ? n_max_ + 1 : 1; }
  double total_spin() const { return 0.5 * n_qubits_; }

  bool operator==(const HilbertSpace&) const = default;

 private:
  HilbertSpace(SpaceKind kind, int n_qubits, int n_max);

  SpaceKind kind_;
  int n_qubits_;
  int n_max_;
};

std::string describe(const HilbertSpace& space);

// Dense operator tied to the space it acts on.
class Operator {
 public:
  Operator(HilbertSpace space, CMatrix matrix, bool hermitian_hint = false);

  static Operator identity(const HilbertSpace& space);
  static Operator zero(const HilbertSpace& space);

  const HilbertSpace& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }
  bool hermitian_hint() const { return hermitian_hint_; }
  Index dim() const { return matrix_.rows(); }

  Operator adjoint() const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(Complex factor);

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(Operator op, Complex factor) { return op *= factor; }
  friend Operator operator*(Complex factor, Operator op) { return op *= factor; }
  friend Operator operator*(Operator op, double factor) { return op *= Complex(factor, 0.0); }
  friend Operator operator*(double factor, Operator op) { return op *= Complex(factor, 0.0); }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);

 private:
  HilbertSpace space_;
  CMatrix matrix_;
  bool hermitian_hint_;
};

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
// Largest absolute matrix entry.
double max_abs(const Operator& op);
double hermiticity_defect(const CMatrix& m);

enum class Representation { PureVector, DensityMatrix };

class QuantumState {
 public:
  static QuantumState pure(HilbertSpace space, CVector psi);
  static QuantumState density(HilbertSpace space, CMatrix rho);
  // Skips the trace/positivity validation; used for integrator output whose
  // drift is tracked and reported separately.
  static QuantumState density_unchecked(HilbertSpace space, CMatrix rho);
  static QuantumState pure_unchecked(HilbertSpace space, CVector psi);

  const HilbertSpace& space() const { return space_; }
  Representation representation() const { return repr_; }
  bool is_pure() const { return repr_ == Representation::PureVector; }

  const CVector& vector() const;
  const CMatrix& matrix() const;
  // rho = |psi><psi| for pure states, the stored matrix otherwise.
  CMatrix density_matrix() const;
  QuantumState to_density() const;

  double norm_or_trace() const;
  double expectation_real(const Operator& op) const;
  Complex expectation(const Operator& op) const;
  // Diagonal of the density matrix.
  RVector probabilities() const;

 private:
  QuantumState(HilbertSpace space, Representation repr, CVector psi, CMatrix rho);

  HilbertSpace space_;
  Representation repr_;
  CVector psi_;
  CMatrix rho_;
};

// Uhlmann fidelity; |<a|b>|^2 when both are pure.
double fidelity(const QuantumState& a, const QuantumState& b);

struct CollectiveSpin {
  Operator sx;
  Operator sy;
  Operator sz;
  Operator splus;
  Operator sminus;
};

CollectiveSpin collective_spin(const HilbertSpace& space);

enum class PauliAxis { X, Y, Z, Plus, Minus };

struct PauliFactor {
  int qubit;
  PauliAxis axis;
};

Operator pauli_string(const HilbertSpace& space, std::span<const PauliFactor> factors);
Operator pauli_string(const HilbertSpace& space, std::initializer_list<PauliFactor> factors);

// 2^N x (N+1) isometry whose k-th column is the normalized symmetric state
// with k excitations.
CMatrix dicke_isometry(int n_qubits);

Operator parity_operator(const HilbertSpace& space);

struct ResonatorOps {
  Operator a;
  Operator a_dagger;
};

// Truncated ladder operators; a^dagger|n_max> = 0, so [a, a^dagger] has
// -n_max in the last photon slot.
ResonatorOps resonator_ops(const HilbertSpace& space);

// Computational-basis helpers.
inline int qubit_bit(int qubit, int n_qubits) { return n_qubits - 1 - qubit; }
inline bool is_excited(std::uint64_t basis, int qubit, int n_qubits) {
  return ((basis >> qubit_bit(qubit, n_qubits)) & 1U) != 0U;
}
int excitation_count(std::uint64_t basis);

// |+>^N (tensored with the photon vacuum when the space has a resonator).
QuantumState product_plus_state(const HilbertSpace& space);
// (|g..g> + e^{i phase}|e..e>)/sqrt(2) on a Dicke or FullSpin space.
QuantumState ghz_state(const HilbertSpace& space, double phase = 0.0);
// Computational basis state of the qubits (photon vacuum when present).
// For Dicke spaces the index is the excitation count, i.e. |J, -J + index>.
QuantumState basis_state(const HilbertSpace& space, std::uint64_t index);

// Maps a Dicke state into FullSpin through the isometry; other spaces are
// returned unchanged.
QuantumState lift_to_full(const QuantumState& state);
// Traces out the resonator of a SpinResonator state; FullSpin and Dicke
// states are returned unchanged.
QuantumState reduce_to_qubits(const QuantumState& state);

}  // namespace lmg
