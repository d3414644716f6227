#include "lmg/dynamics.hpp"
#include "lmg/observables.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace {

using namespace lmg;

CMatrix expm_hermitian(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector ph = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp();
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

TEST(IntegratorConfig, Validation) {
  EXPECT_THROW((IntegratorConfig{0.0, {1.0}}.validate()), std::invalid_argument);
  EXPECT_THROW((IntegratorConfig{0.1, {}}.validate()), std::invalid_argument);
  EXPECT_THROW((IntegratorConfig{0.1, {-1.0, 1.0}}.validate()), std::invalid_argument);
  EXPECT_THROW((IntegratorConfig{0.1, {1.0, 1.0}}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((IntegratorConfig{0.1, {0.0, 1.0}}.validate()));
}

TEST(UniformCheckpoints, Grid) {
  const auto g = uniform_checkpoints(150.0, 2.0);
  ASSERT_EQ(g.size(), 76u);
  EXPECT_DOUBLE_EQ(g.back(), 150.0);
  EXPECT_THROW(uniform_checkpoints(10.0, 0.0), std::invalid_argument);
}

TEST(EvolvePure, SnapsOffGridCheckpointsWithWarning) {
  const auto sp = HilbertSpace::dicke(1);
  const DrivenHamiltonian h(Operator::zero(sp));
  const auto rec = evolve_pure(h, product_plus_state(sp), {0.1, {0.0, 0.33}});
  ASSERT_EQ(rec.checkpoints.size(), 2u);
  EXPECT_NEAR(rec.checkpoints[1].time, 0.3, 1e-12);
  EXPECT_EQ(rec.warnings.size(), 1u);
}

TEST(EvolvePure, GlobalPiRotation) {
  const auto sp = HilbertSpace::dicke(6);
  const double omega = 0.4;
  const DrivenHamiltonian h(lmg_hamiltonian(sp, omega, 0.0));
  const double t = std::numbers::pi / omega;
  const auto rec = evolve_pure(h, basis_state(sp, 0), {t / 2000.0, {0.0, t}});
  EXPECT_GT(excitation_populations(rec.final_state())[6], 1.0 - 1e-6);
}

TEST(EvolvePure, SingleQubitStationary) {
  const auto sp = HilbertSpace::dicke(1);
  const DrivenHamiltonian h(lmg_hamiltonian(sp, 0.0, 0.9));
  const auto rec = evolve_pure(h, product_plus_state(sp), {0.05, {0.0, 50.0}});
  const auto sx = collective_spin(sp).sx;
  EXPECT_NEAR(2.0 * rec.final_state().expectation_real(sx), 1.0, 1e-10);
}

TEST(EvolvePure, MatchesMatrixExponential) {
  const auto sp = HilbertSpace::full_spin(3);
  const auto h = lmg_hamiltonian(sp, 0.3, 0.2) +
                 0.1 * pauli_string(sp, {{0, PauliAxis::Z}, {2, PauliAxis::X}});
  const auto psi0 = product_plus_state(sp);
  const auto rec = evolve_pure(DrivenHamiltonian(h), psi0, {0.01, {0.0, 20.0}});
  const CVector exact = expm_hermitian(h.matrix(), 20.0) * psi0.vector();
  EXPECT_LT((rec.final_state().vector() - exact).norm(), 1e-9);
}

TEST(EvolvePure, ConservesEnergyForConstantH) {
  const auto sp = HilbertSpace::dicke(6);
  const auto h = lmg_hamiltonian(sp, units::mhz(40.0), units::mhz(3.8));
  const auto psi0 = product_plus_state(sp);
  // RK4 is not symplectic: the drift scales as dt^4 (about 1.3e-7 at dt = 0.05).
  const auto rec = evolve_pure(DrivenHamiltonian(h), psi0, {0.02, uniform_checkpoints(150, 10)});
  const double e0 = psi0.expectation_real(h);
  for (const auto& c : rec.checkpoints) {
    EXPECT_NEAR(c.state.expectation_real(h), e0, 1e-8);
  }
}

TEST(EvolvePure, DrivenAndFunctionOverloadsAgree) {
  const auto sp = HilbertSpace::dicke(4);
  const auto s = collective_spin(sp);
  const QuenchSchedule sch;
  const auto stat = lmg_hamiltonian(sp, 0.0, units::mhz(3.8));
  const auto driven = quench_hamiltonian(stat, s.sx, sch);
  const HamiltonianFn fn = [&](double t) { return stat + quench_omega(t, sch) * s.sx; };
  const IntegratorConfig cfg{0.05, {0.0, 75.0, 150.0}};
  const auto a = evolve_pure(driven, product_plus_state(sp), cfg);
  const auto b = evolve_pure(fn, product_plus_state(sp), cfg);
  EXPECT_LT((a.final_state().vector() - b.final_state().vector()).norm(), 1e-12);
  EXPECT_LT(max_abs(driven.at(10.0) - fn(10.0)), 1e-15);
}

TEST(EvolvePure, DickeAndFullSpinQuenchAgree) {
  const QuenchSchedule sch;
  const double lam = units::mhz(3.8);
  const auto dk = HilbertSpace::dicke(4);
  const auto fs = HilbertSpace::full_spin(4);
  const IntegratorConfig cfg{0.05, {0.0, 150.0}};
  const auto a = evolve_pure(
      quench_hamiltonian(lmg_hamiltonian(dk, 0.0, lam), collective_spin(dk).sx, sch),
      product_plus_state(dk), cfg);
  const auto b = evolve_pure(
      quench_hamiltonian(lmg_hamiltonian(fs, 0.0, lam), collective_spin(fs).sx, sch),
      product_plus_state(fs), cfg);
  const CVector mapped = dicke_isometry(4) * a.final_state().vector();
  EXPECT_LT(1.0 - std::norm(mapped.dot(b.final_state().vector())), 1e-8);
}

TEST(EvolvePure, ThrowsOnDivergence) {
  const auto sp = HilbertSpace::dicke(6);
  const DrivenHamiltonian h(lmg_hamiltonian(sp, 10.0, 10.0));
  EXPECT_THROW(evolve_pure(h, product_plus_state(sp), {1.0, {0.0, 20.0}}), IntegrationDiverged);
}

TEST(EvolvePure, RejectsMismatchedStates) {
  const auto sp = HilbertSpace::dicke(3);
  const DrivenHamiltonian h(Operator::zero(sp));
  EXPECT_THROW(evolve_pure(h, product_plus_state(HilbertSpace::dicke(4)), {0.1, {0.0, 1.0}}),
               std::invalid_argument);
  EXPECT_THROW(evolve_pure(h, product_plus_state(sp).to_density(), {0.1, {0.0, 1.0}}),
               std::invalid_argument);
}

TEST(DrivenHamiltonian, TermSpaceMismatch) {
  DrivenHamiltonian h(Operator::zero(HilbertSpace::dicke(2)));
  EXPECT_THROW(h.add_term(Operator::zero(HilbertSpace::dicke(3)), [](double) { return 1.0; }),
               std::invalid_argument);
}

TEST(EvolveLindblad, SingleQubitT1Decay) {
  const auto sp = HilbertSpace::full_spin(1);
  const double t1 = units::us(17.8);
  std::vector<CollapseOperator> ops{
      {std::sqrt(1.0 / t1) * pauli_string(sp, {{0, PauliAxis::Minus}}), 1.0 / t1, "decay"}};
  const auto rho0 = basis_state(sp, 1).to_density();
  const auto rec =
      evolve_lindblad(DrivenHamiltonian(Operator::zero(sp)), rho0, ops, {1.0, {0.0, 1000.0}});
  const double pe = rec.final_state().density_matrix()(1, 1).real();
  EXPECT_NEAR(pe, std::exp(-1000.0 / 17800.0), 1e-6);
  EXPECT_NEAR(pe, 0.9453, 1e-4);
}

TEST(EvolveLindblad, DephasingDecaysCoherence) {
  const auto sp = HilbertSpace::full_spin(1);
  const double g = 1e-3;
  std::vector<CollapseOperator> ops{
      {std::sqrt(0.5 * g) * pauli_string(sp, {{0, PauliAxis::Z}}), g, "dephasing"}};
  const auto rec = evolve_lindblad(DrivenHamiltonian(Operator::zero(sp)),
                                   product_plus_state(sp).to_density(), ops, {1.0, {0.0, 500.0}});
  EXPECT_NEAR(std::abs(rec.final_state().density_matrix()(0, 1)), 0.5 * std::exp(-g * 500.0), 1e-8);
}

TEST(EvolveLindblad, ClosedSystemMatchesPure) {
  const auto sp = HilbertSpace::full_spin(3);
  const QuenchSchedule sch;
  const auto h = quench_hamiltonian(lmg_hamiltonian(sp, 0.0, units::mhz(3.8)),
                                    collective_spin(sp).sx, sch);
  const IntegratorConfig cfg{0.05, {0.0, 50.0, 150.0}};
  const auto psi0 = product_plus_state(sp);
  const auto pure = evolve_pure(h, psi0, cfg);
  const auto mixed = evolve_lindblad(h, psi0.to_density(), {}, cfg);
  for (std::size_t k = 0; k < cfg.checkpoint_times.size(); ++k) {
    const CVector v = pure.checkpoints[k].state.vector();
    EXPECT_LT((v * v.adjoint() - mixed.checkpoints[k].state.density_matrix()).cwiseAbs().maxCoeff(),
              1e-8);
  }
}

TEST(EvolveLindblad, TraceAndHermiticityPreserved) {
  const auto dev = homogeneous_device(2, units::mhz(20.0), units::mhz(-106.5));
  const auto terms = circuit_qed_terms(dev, 2);
  const auto h = quench_hamiltonian(terms.static_part, terms.drive_part, QuenchSchedule{});
  auto d2 = dev;
  d2.t1 = {500.0, 800.0};
  d2.t2 = {400.0, 600.0};
  const auto ops = lindblad_operators(d2, {true, true}, terms.static_part.space());
  const auto rec = evolve_lindblad(h, product_plus_state(terms.static_part.space()).to_density(),
                                   ops.ops, {0.005, {0.0, 25.0}});
  EXPECT_LT(rec.norm_drift, 1e-6);
  const CMatrix& rho = rec.final_state().density_matrix();
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
}

TEST(EvolveLindblad, GeneralJumpOperatorAgreesWithFunctionOverload) {
  // A non-monomial jump (sigma_x + sigma_z) exercises the dense path.
  const auto sp = HilbertSpace::full_spin(2);
  const auto l = 0.05 * (pauli_string(sp, {{0, PauliAxis::X}}) + pauli_string(sp, {{1, PauliAxis::Z}}));
  std::vector<CollapseOperator> ops{{l, 0.0025, "mixed"}};
  const auto stat = lmg_hamiltonian(sp, 0.3, 0.2);
  const DrivenHamiltonian driven(stat);
  const HamiltonianFn fn = [&](double) { return stat; };
  const IntegratorConfig cfg{0.02, {0.0, 10.0}};
  const auto rho0 = product_plus_state(sp).to_density();
  const auto a = evolve_lindblad(driven, rho0, ops, cfg);
  const auto b = evolve_lindblad(fn, rho0, ops, cfg);
  EXPECT_LT((a.final_state().density_matrix() - b.final_state().density_matrix()).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LT(a.norm_drift, 1e-10);
}

TEST(EvolveLindblad, RequiresMatchingSpaces) {
  const auto sp = HilbertSpace::full_spin(2);
  std::vector<CollapseOperator> ops{
      {pauli_string(HilbertSpace::full_spin(3), {{0, PauliAxis::Minus}}), 1.0, "x"}};
  EXPECT_THROW(evolve_lindblad(DrivenHamiltonian(Operator::zero(sp)),
                               product_plus_state(sp).to_density(), ops, {0.1, {0.0, 1.0}}),
               std::invalid_argument);
}

TEST(ConvergenceCheck, EffectiveModelAndZeroHamiltonian) {
  const auto sp = HilbertSpace::dicke(6);
  const auto h = quench_hamiltonian(lmg_hamiltonian(sp, 0.0, units::mhz(3.8)),
                                    collective_spin(sp).sx, QuenchSchedule{});
  const auto rep = convergence_check(
      [&](double dt) { return evolve_pure(h, product_plus_state(sp), {dt, {0.0, 150.0}}); }, 0.05);
  EXPECT_TRUE(rep.passed);
  EXPECT_LT(rep.fidelity_deficit, 1e-7);

  const DrivenHamiltonian zero(Operator::zero(sp));
  const auto rz = convergence_check(
      [&](double dt) { return evolve_pure(zero, product_plus_state(sp), {dt, {0.0, 10.0}}); }, 0.1);
  EXPECT_EQ(rz.fidelity_deficit, 0.0);
}

TEST(ConvergenceCheck, FullModelShortWindow) {
  const auto dev = homogeneous_device(2, units::mhz(20.0), units::mhz(-106.5));
  const auto t = circuit_qed_terms(dev, 2);
  const auto h = quench_hamiltonian(t.static_part, t.drive_part, QuenchSchedule{});
  const auto rep = convergence_check(
      [&](double dt) {
        return evolve_pure(h, product_plus_state(t.static_part.space()), {dt, {0.0, 150.0}});
      },
      kDefaultFullModelDt);
  EXPECT_TRUE(rep.passed) << rep.fidelity_deficit;
}

}  // namespace
