#pragma once

// Static analysis of the LMG Hamiltonian: parity-resolved spectra, splitting
// scans, second-order level shifts and adiabatic-following diagnostics.

#include "lmg/dynamics.hpp"
#include "lmg/hilbert.hpp"

#include <vector>

namespace lmg {

struct ParityEigensystem {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // columns, parity-definite within degenerate blocks
  std::vector<int> parity;
  RVector parity_expectation;  // <v|P|v>, +-1 up to rounding
};

// Diagonalizes H and, inside each degenerate block, P. Throws if
// max|[H, P]| exceeds 1e-10 (relative to max|H| when that is larger than 1).
ParityEigensystem eigendecompose_with_parity(const Operator& h, const Operator& parity);

enum class ExtremalTarget { HighestOfEffective, GroundOfLmg };

struct SpectrumPoint {
  double control = 0.0;  // Omega / lambda
  double omega = 0.0;
  RVector eigenvalues;
  std::vector<int> parity;
  // Separation of the two levels on the target side of the spectrum.
  double splitting = 0.0;
  // Separation between the second and third levels on that side.
  double gap_to_rest = 0.0;
};

struct SpectrumScan {
  int n_qubits = 0;
  double lam = 0.0;
  ExtremalTarget target = ExtremalTarget::HighestOfEffective;
  std::vector<SpectrumPoint> points;
};

// Dicke-space scan of omega Sx + lam Sz^2 (or its negative for GroundOfLmg).
SpectrumScan degeneracy_scan(int n_qubits, double lam, std::span<const double> omega_values,
                             ExtremalTarget target = ExtremalTarget::HighestOfEffective);

// Second-order shifts of |J, m> for sign * (omega Sx + lam Sz^2) at small
// omega. With sign = -1 (the -omega Sx - lam Sz^2 form)
//   eta_m = omega_m^2 / lambda_m - omega_{m-1}^2 / lambda_{m-1}
// with lambda_m = (2m + 1) lam and omega_m = <m+1| omega Sx |m>
// = (omega / 2) sqrt((J - m)(J + m + 1)), so eta_{+-J} = -J omega^2 / (2 (2J - 1) lam).
// sign = +1 flips every shift.
struct PerturbativeShifts {
  double j = 0.0;
  double omega = 0.0;
  double lam = 0.0;
  int sign = -1;
  std::vector<double> m_values;  // -J .. J
  std::vector<double> eta;       // aligned with m_values
  std::vector<double> omega_m;   // m = -J .. J-1
  std::vector<double> lambda_m;  // m = -J .. J-1

  double eta_at(double m) const;
};

// Throws for odd N: lambda_{-1/2} = 0 needs degenerate perturbation theory.
PerturbativeShifts perturbative_shifts(int n_qubits, double omega, double lam, int sign = -1);

struct ShiftComparison {
  double m = 0.0;
  double exact = 0.0;  // eigenvalue - sign * lam m^2
  double predicted = 0.0;
  double relative_error = 0.0;
  // Same comparison for the mean shift of the +-m doublet; equals
  // relative_error for m = 0.
  double doublet_relative_error = 0.0;
};

// Exact shifts from dense diagonalization, matched to |J, m> by sorting.
std::vector<ShiftComparison> compare_perturbative_shifts(int n_qubits, double omega, double lam,
                                                         int sign = -1);

struct AdiabaticPoint {
  double time = 0.0;
  double overlap = 0.0;
  int eigenspace_dim = 1;
};

// Overlap of each checkpoint with the tracked extremal eigenstate of H(t).
// Two extremal levels closer than `degeneracy_tol` (rad/ns) are treated as a
// single 2-dimensional eigenspace.
std::vector<AdiabaticPoint> adiabaticity_overlap(const TrajectoryRecord& trajectory,
                                                 const HamiltonianFn& hamiltonian,
                                                 ExtremalTarget target,
                                                 double degeneracy_tol = 1e-6);

}  // namespace lmg
