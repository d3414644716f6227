#include "lmg/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

namespace lmg {

namespace {

using SparseC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

constexpr double kSnapTol = 1e-9;
constexpr double kDivergenceTol = 1e-4;
constexpr double kNegativeEigenWarn = -1e-6;
constexpr double kSparseDropTol = 0.0;

const Complex kMinusI(0.0, -1.0);

SparseC to_sparse(const CMatrix& m) {
  return m.sparseView(1.0, kSparseDropTol);
}

// Static part plus time-dependent terms on one merged sparsity pattern, so
// each derivative needs a single sparse product.
class MergedSparse {
 public:
  MergedSparse(const CMatrix& base, const std::vector<CMatrix>& terms) {
    CMatrix pattern = base.cwiseAbs().cast<Complex>();
    for (const auto& t : terms) {
      pattern += t.cwiseAbs().cast<Complex>();
    }
    matrix_ = to_sparse(pattern);
    base_ = gather(base);
    for (const auto& t : terms) {
      terms_.push_back(gather(t));
    }
  }

  const SparseC& at(std::span<const double> coefficients) {
    Complex* v = matrix_.valuePtr();
    for (Index i = 0; i < base_.size(); ++i) {
      v[i] = base_(i);
    }
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (coefficients[k] != 0.0) {
        Eigen::Map<CVector>(v, base_.size()) += coefficients[k] * terms_[k];
      }
    }
    return matrix_;
  }

 private:
  CVector gather(const CMatrix& m) const {
    CVector out(matrix_.nonZeros());
    Index i = 0;
    for (Index r = 0; r < matrix_.outerSize(); ++r) {
      for (SparseC::InnerIterator it(matrix_, r); it; ++it) {
        out(i++) = m(it.row(), it.col());
      }
    }
    return out;
  }

  SparseC matrix_;
  CVector base_;
  std::vector<CVector> terms_;
};

struct StepPlan {
  long total_steps = 0;
  std::vector<long> checkpoint_steps;
  std::vector<std::string> warnings;
};

StepPlan plan_steps(const IntegratorConfig& cfg) {
  cfg.validate();
  StepPlan plan;
  for (double t : cfg.checkpoint_times) {
    const long step = std::lround(t / cfg.dt);
    const double snapped = static_cast<double>(step) * cfg.dt;
    if (std::abs(snapped - t) > kSnapTol) {
      std::ostringstream os;
      os << "checkpoint " << t << " ns snapped to " << snapped << " ns";
      plan.warnings.push_back(os.str());
    }
    plan.checkpoint_steps.push_back(step);
  }
  plan.total_steps = plan.checkpoint_steps.empty() ? 0 : plan.checkpoint_steps.back();
  return plan;
}

// Classic RK4 over a fixed grid t_n = n dt. `deriv(t, y, dy)` writes dy/dt.
// `record(step, y)` is invoked for every checkpoint step (before stepping),
// `after_step(y)` after each completed step.
template <typename T, typename Deriv, typename Record, typename AfterStep>
void rk4_integrate(T& y, const StepPlan& plan, double dt, Deriv&& deriv, Record&& record,
                   AfterStep&& after_step) {
  T k = y;
  T acc = y;
  T tmp = y;
  std::size_t next = 0;
  for (long step = 0;; ++step) {
    while (next < plan.checkpoint_steps.size() && plan.checkpoint_steps[next] == step) {
      record(step, y);
      ++next;
    }
    if (step >= plan.total_steps) {
      break;
    }
    const double t = static_cast<double>(step) * dt;
    deriv(t, y, k);
    acc = k;
    tmp = y + (0.5 * dt) * k;
    deriv(t + 0.5 * dt, tmp, k);
    acc += 2.0 * k;
    tmp = y + (0.5 * dt) * k;
    deriv(t + 0.5 * dt, tmp, k);
    acc += 2.0 * k;
    tmp = y + dt * k;
    deriv(t + dt, tmp, k);
    acc += k;
    y += (dt / 6.0) * acc;
    after_step(y);
  }
}

void check_drift(double drift, const char* what) {
  if (drift > kDivergenceTol) {
    std::ostringstream os;
    os << what << " drift " << drift << " exceeds 1e-4; integration diverged, reduce dt";
    throw IntegrationDiverged(os.str());
  }
}

// L rho L^dagger for operators with at most one nonzero per row:
// (L rho L^dag)_ab = l_a conj(l_b) rho_{c(a) c(b)}.
struct MonomialJump {
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<Complex> vals;
};

bool as_monomial(const CMatrix& l, MonomialJump& out) {
  out = {};
  for (Index r = 0; r < l.rows(); ++r) {
    Index col = -1;
    for (Index c = 0; c < l.cols(); ++c) {
      if (l(r, c) != Complex(0.0, 0.0)) {
        if (col >= 0) {
          return false;
        }
        col = c;
      }
    }
    if (col >= 0) {
      out.rows.push_back(r);
      out.cols.push_back(col);
      out.vals.push_back(l(r, col));
    }
  }
  return true;
}

// Jump part of the dissipator, sum_k L_k rho L_k^dag.
class JumpTerms {
 public:
  explicit JumpTerms(std::span<const CollapseOperator> lindblads) {
    for (const auto& c : lindblads) {
      MonomialJump m;
      const CMatrix& l = c.op.matrix();
      if (l.isDiagonal(0.0)) {
        // (L rho L^dag)_ab = l_a conj(l_b) rho_ab
        const CVector d = l.diagonal();
        const CMatrix outer = d * d.adjoint();
        diagonal_mask_ = diagonal_mask_.size() == 0 ? outer : CMatrix(diagonal_mask_ + outer);
      } else if (as_monomial(l, m)) {
        monomial_.push_back(std::move(m));
      } else {
        general_.push_back(to_sparse(c.op.matrix()));
      }
    }
  }

  void add_to(const CMatrix& rho, CMatrix& out) const {
    if (diagonal_mask_.size() != 0) {
      out.array() += diagonal_mask_.array() * rho.array();
    }
    for (const auto& m : monomial_) {
      const std::size_t n = m.rows.size();
      for (std::size_t b = 0; b < n; ++b) {
        const Complex vb = std::conj(m.vals[b]);
        const Index cb = m.cols[b];
        const Index rb = m.rows[b];
        for (std::size_t a = 0; a < n; ++a) {
          out(m.rows[a], rb) += m.vals[a] * vb * rho(m.cols[a], cb);
        }
      }
    }
    for (const auto& l : general_) {
      const CMatrix lr = l * rho;
      out.noalias() += (l * lr.adjoint()).adjoint();
    }
  }

 private:
  std::vector<MonomialJump> monomial_;
  std::vector<SparseC> general_;
  CMatrix diagonal_mask_;
};

CMatrix sum_ldag_l(std::span<const CollapseOperator> lindblads, Index dim) {
  CMatrix s = CMatrix::Zero(dim, dim);
  for (const auto& c : lindblads) {
    s.noalias() += c.op.matrix().adjoint() * c.op.matrix();
  }
  return s;
}

void require_space(const HilbertSpace& expected, const QuantumState& state, const char* what) {
  if (!(expected == state.space())) {
    throw std::invalid_argument(std::string(what) + ": state space " + describe(state.space()) +
                                " does not match Hamiltonian space " + describe(expected));
  }
}

void require_lindblad_space(const HilbertSpace& space,
                            std::span<const CollapseOperator> lindblads) {
  for (const auto& c : lindblads) {
    if (!(c.op.space() == space)) {
      throw std::invalid_argument("evolve_lindblad: collapse operator space mismatch");
    }
  }
}

template <typename Deriv>
TrajectoryRecord run_pure(const HilbertSpace& space, const QuantumState& psi0,
                          const IntegratorConfig& cfg, Deriv&& deriv) {
  if (!psi0.is_pure()) {
    throw std::invalid_argument("evolve_pure: initial state must be a pure vector");
  }
  const StepPlan plan = plan_steps(cfg);
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.warnings = plan.warnings;
  CVector psi = psi0.vector();
  rec.norm_drift = std::abs(psi.norm() - 1.0);
  rk4_integrate(
      psi, plan, cfg.dt, deriv,
      [&](long step, const CVector& y) {
        rec.checkpoints.push_back(
            {static_cast<double>(step) * cfg.dt, QuantumState::pure_unchecked(space, y)});
      },
      [&](const CVector& y) {
        rec.norm_drift = std::max(rec.norm_drift, std::abs(y.norm() - 1.0));
        check_drift(rec.norm_drift, "norm");
      });
  return rec;
}

template <typename Deriv>
TrajectoryRecord run_density(const HilbertSpace& space, const QuantumState& rho0,
                             const IntegratorConfig& cfg, Deriv&& deriv) {
  const StepPlan plan = plan_steps(cfg);
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.warnings = plan.warnings;
  CMatrix rho = rho0.density_matrix();
  rec.norm_drift = std::abs(rho.trace().real() - 1.0);
  rk4_integrate(
      rho, plan, cfg.dt, deriv,
      [&](long step, const CMatrix& y) {
        const double t = static_cast<double>(step) * cfg.dt;
        Eigen::SelfAdjointEigenSolver<CMatrix> es(y, Eigen::EigenvaluesOnly);
        const double lowest = es.eigenvalues().minCoeff();
        if (lowest < kNegativeEigenWarn) {
          std::ostringstream os;
          os << "t=" << t << " ns: density matrix eigenvalue " << lowest << " below -1e-6";
          rec.warnings.push_back(os.str());
        }
        rec.checkpoints.push_back({t, QuantumState::density_unchecked(space, y)});
      },
      [&](CMatrix& y) {
        y = 0.5 * (y + y.adjoint()).eval();
        rec.norm_drift = std::max(rec.norm_drift, std::abs(y.trace().real() - 1.0));
        check_drift(rec.norm_drift, "trace");
      });
  return rec;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("IntegratorConfig.dt: must be > 0");
  }
  if (checkpoint_times.empty()) {
    throw std::invalid_argument("IntegratorConfig.checkpoint_times: at least one checkpoint");
  }
  for (std::size_t i = 0; i < checkpoint_times.size(); ++i) {
    if (checkpoint_times[i] < 0.0) {
      throw std::invalid_argument("IntegratorConfig.checkpoint_times: negative time");
    }
    if (i > 0 && checkpoint_times[i] <= checkpoint_times[i - 1]) {
      throw std::invalid_argument("IntegratorConfig.checkpoint_times: must be strictly increasing");
    }
  }
}

std::vector<double> uniform_checkpoints(double end, double spacing) {
  if (!(spacing > 0.0) || end < 0.0) {
    throw std::invalid_argument("uniform_checkpoints: need spacing > 0 and end >= 0");
  }
  std::vector<double> out;
  const long n = std::lround(std::floor(end / spacing + 1e-9));
  for (long i = 0; i <= n; ++i) {
    out.push_back(static_cast<double>(i) * spacing);
  }
  if (end - out.back() > 1e-9) {
    out.push_back(end);
  }
  return out;
}

const QuantumState& TrajectoryRecord::final_state() const {
  if (checkpoints.empty()) {
    throw std::logic_error("TrajectoryRecord: no checkpoints recorded");
  }
  return checkpoints.back().state;
}

DrivenHamiltonian::DrivenHamiltonian(Operator static_part) : static_part_(std::move(static_part)) {}

DrivenHamiltonian& DrivenHamiltonian::add_term(Operator op, Coefficient coefficient) {
  if (!(op.space() == static_part_.space())) {
    throw std::invalid_argument("DrivenHamiltonian: term space mismatch");
  }
  terms_.push_back({std::move(op), std::move(coefficient)});
  return *this;
}

Operator DrivenHamiltonian::at(double t) const {
  Operator h = static_part_;
  for (const auto& term : terms_) {
    h += term.coefficient(t) * term.op;
  }
  return h;
}

DrivenHamiltonian quench_hamiltonian(Operator static_part, Operator drive_part,
                                     const QuenchSchedule& schedule) {
  schedule.validate();
  DrivenHamiltonian h(std::move(static_part));
  h.add_term(std::move(drive_part),
             [schedule](double t) { return quench_omega(std::max(t, 0.0), schedule); });
  return h;
}

TrajectoryRecord evolve_pure(const DrivenHamiltonian& hamiltonian, const QuantumState& psi0,
                             const IntegratorConfig& cfg) {
  require_space(hamiltonian.space(), psi0, "evolve_pure");
  std::vector<CMatrix> terms;
  for (std::size_t k = 0; k < hamiltonian.term_count(); ++k) {
    terms.push_back(kMinusI * hamiltonian.term(k).matrix());
  }
  MergedSparse gen(kMinusI * hamiltonian.static_part().matrix(), terms);
  std::vector<double> f(terms.size());
  return run_pure(hamiltonian.space(), psi0, cfg,
                  [&](double t, const CVector& in, CVector& out) {
                    for (std::size_t k = 0; k < f.size(); ++k) {
                      f[k] = hamiltonian.coefficient(k, t);
                    }
                    out.noalias() = gen.at(f) * in;
                  });
}

TrajectoryRecord evolve_pure(const HamiltonianFn& hamiltonian, const QuantumState& psi0,
                             const IntegratorConfig& cfg) {
  const HilbertSpace space = psi0.space();
  return run_pure(space, psi0, cfg, [&](double t, const CVector& in, CVector& out) {
    const Operator h = hamiltonian(t);
    require_space(h.space(), psi0, "evolve_pure");
    out.noalias() = kMinusI * (h.matrix() * in);
  });
}

TrajectoryRecord evolve_lindblad(const DrivenHamiltonian& hamiltonian, const QuantumState& rho0,
                                 std::span<const CollapseOperator> lindblads,
                                 const IntegratorConfig& cfg) {
  require_space(hamiltonian.space(), rho0, "evolve_lindblad");
  require_lindblad_space(hamiltonian.space(), lindblads);
  const Index dim = hamiltonian.space().dim();
  // d rho/dt = X + X^dag + sum L rho L^dag with X = -i H_eff rho and
  // H_eff = H - (i/2) sum L^dag L.
  const CMatrix heff0 = hamiltonian.static_part().matrix() -
                        Complex(0.0, 0.5) * sum_ldag_l(lindblads, dim);
  // Works with A^dag, A = -i H_eff: Y = rho A^dag = X^dag, and a dense-times-sparse
  // product is several times faster than sparse-times-dense here.
  std::vector<CMatrix> terms;
  for (std::size_t k = 0; k < hamiltonian.term_count(); ++k) {
    terms.push_back((kMinusI * hamiltonian.term(k).matrix()).adjoint());
  }
  MergedSparse gen((kMinusI * heff0).adjoint(), terms);
  std::vector<double> f(terms.size());
  const JumpTerms jumps(lindblads);
  CMatrix x(dim, dim);
  return run_density(hamiltonian.space(), rho0, cfg,
                     [&](double t, const CMatrix& in, CMatrix& out) {
                       for (std::size_t k = 0; k < f.size(); ++k) {
                         f[k] = hamiltonian.coefficient(k, t);
                       }
                       x.noalias() = in * gen.at(f);
                       out = x + x.adjoint();
                       jumps.add_to(in, out);
                     });
}

TrajectoryRecord evolve_lindblad(const HamiltonianFn& hamiltonian, const QuantumState& rho0,
                                 std::span<const CollapseOperator> lindblads,
                                 const IntegratorConfig& cfg) {
  const HilbertSpace space = rho0.space();
  require_lindblad_space(space, lindblads);
  const CMatrix damping = Complex(0.0, 0.5) * sum_ldag_l(lindblads, space.dim());
  const JumpTerms jumps(lindblads);
  return run_density(space, rho0, cfg, [&](double t, const CMatrix& in, CMatrix& out) {
    const Operator h = hamiltonian(t);
    require_space(h.space(), rho0, "evolve_lindblad");
    const CMatrix x = kMinusI * ((h.matrix() - damping) * in);
    out = x + x.adjoint();
    jumps.add_to(in, out);
  });
}

ConvergenceReport convergence_check(const std::function<TrajectoryRecord(double)>& run, double dt,
                                    double tolerance) {
  const TrajectoryRecord coarse = run(dt);
  const TrajectoryRecord fine = run(0.5 * dt);
  const QuantumState& a = coarse.final_state();
  const QuantumState& b = fine.final_state();
  ConvergenceReport report;
  report.dt = dt;
  report.tolerance = tolerance;
  const bool identical = a.is_pure() == b.is_pure() &&
                         (a.is_pure() ? a.vector() == b.vector() : a.matrix() == b.matrix());
  if (!identical) {
    double f = 0.0;
    if (a.is_pure() && b.is_pure()) {
      f = std::norm(a.vector().dot(b.vector())) / (a.vector().squaredNorm() * b.vector().squaredNorm());
    } else {
      f = fidelity(a, b);
    }
    report.fidelity_deficit = std::max(0.0, 1.0 - f);
  }
  report.passed = report.fidelity_deficit < tolerance;
  return report;
}

}  // namespace lmg
