#pragma once

// Fixed-step RK4 integration of the Schroedinger and Lindblad equations.

#include "lmg/hilbert.hpp"
#include "lmg/model.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmg {

struct IntegratorConfig {
  double dt = 0.05;
  // Sorted, non-negative; the run ends at the last one. Times that are not a
  // multiple of dt (within 1e-9) snap to the nearest step.
  std::vector<double> checkpoint_times;

  void validate() const;
  double end_time() const { return checkpoint_times.empty() ? 0.0 : checkpoint_times.back(); }
};

constexpr double kDefaultEffectiveDt = 0.05;
constexpr double kDefaultFullModelDt = 0.005;

// Evenly spaced checkpoints 0, spacing, ..., up to and including `end`.
std::vector<double> uniform_checkpoints(double end, double spacing);

struct Checkpoint {
  double time;
  QuantumState state;
};

struct TrajectoryRecord {
  std::vector<Checkpoint> checkpoints;
  // max |norm - 1| (pure) or |Tr rho - 1| (density) over every step.
  double norm_drift = 0.0;
  IntegratorConfig config;
  std::vector<std::string> warnings;

  const QuantumState& final_state() const;
};

class IntegrationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// H(t) = static_part + sum_k f_k(t) term_k. Terms are kept separately so the
// integrator can use sparse products with precomputed structure.
class DrivenHamiltonian {
 public:
  using Coefficient = std::function<double(double)>;

  explicit DrivenHamiltonian(Operator static_part);

  DrivenHamiltonian& add_term(Operator op, Coefficient coefficient);

  const HilbertSpace& space() const { return static_part_.space(); }
  const Operator& static_part() const { return static_part_; }
  std::size_t term_count() const { return terms_.size(); }
  const Operator& term(std::size_t k) const { return terms_[k].op; }
  double coefficient(std::size_t k, double t) const { return terms_[k].coefficient(t); }

  Operator at(double t) const;

 private:
  struct Term {
    Operator op;
    Coefficient coefficient;
  };
  Operator static_part_;
  std::vector<Term> terms_;
};

using HamiltonianFn = std::function<Operator(double)>;

// Drive-amplitude schedule wrapped as a Hamiltonian: static + Omega(t) drive.
DrivenHamiltonian quench_hamiltonian(Operator static_part, Operator drive_part,
                                     const QuenchSchedule& schedule);

TrajectoryRecord evolve_pure(const DrivenHamiltonian& hamiltonian, const QuantumState& psi0,
                             const IntegratorConfig& cfg);
TrajectoryRecord evolve_pure(const HamiltonianFn& hamiltonian, const QuantumState& psi0,
                             const IntegratorConfig& cfg);

TrajectoryRecord evolve_lindblad(const DrivenHamiltonian& hamiltonian, const QuantumState& rho0,
                                 std::span<const CollapseOperator> lindblads,
                                 const IntegratorConfig& cfg);
TrajectoryRecord evolve_lindblad(const HamiltonianFn& hamiltonian, const QuantumState& rho0,
                                 std::span<const CollapseOperator> lindblads,
                                 const IntegratorConfig& cfg);

struct ConvergenceReport {
  double dt = 0.0;
  double fidelity_deficit = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares the final state of run(dt) against run(dt / 2).
ConvergenceReport convergence_check(const std::function<TrajectoryRecord(double)>& run, double dt,
                                    double tolerance = 1e-7);

}  // namespace lmg
