#include "lmg/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lmg {

namespace {

constexpr double kPureNormTol = 1e-8;
constexpr double kTraceTol = 1e-8;
constexpr double kRhoHermitianTol = 1e-10;
constexpr double kRhoEigenTol = -1e-8;
constexpr double kHermitianHintTol = 1e-12;
constexpr int kMaxFullQubits = 12;

// Single-qubit matrix in the (g, e) basis.
Eigen::Matrix2cd single_qubit(PauliAxis axis) {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (axis) {
    case PauliAxis::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case PauliAxis::Y:
      m(1, 0) = -i;  // <e|sigma_y|g>
      m(0, 1) = i;
      break;
    case PauliAxis::Z:
      m(0, 0) = -1.0;
      m(1, 1) = 1.0;
      break;
    case PauliAxis::Plus:
      m(1, 0) = 1.0;
      break;
    case PauliAxis::Minus:
      m(0, 1) = 1.0;
      break;
  }
  return m;
}

bool is_hermitian_axis(PauliAxis axis) {
  return axis == PauliAxis::X || axis == PauliAxis::Y || axis == PauliAxis::Z;
}

void require_qubit_kinds(const HilbertSpace& space, bool allow_dicke, bool allow_resonator,
                         const char* what) {
  const bool ok = space.kind() == SpaceKind::FullSpin ||
                  (allow_dicke && space.kind() == SpaceKind::Dicke) ||
                  (allow_resonator && space.kind() == SpaceKind::SpinResonator);
  if (!ok) {
    throw std::invalid_argument(std::string(what) + ": unsupported space kind " +
                                to_string(space.kind()));
  }
}

// Lifts a qubit-register matrix to the full space (identity on the photon).
CMatrix with_photon_identity(const CMatrix& qubit_matrix, const HilbertSpace& space) {
  const Index nph = space.photon_dim();
  if (nph == 1) {
    return qubit_matrix;
  }
  const Index dq = qubit_matrix.rows();
  CMatrix out = CMatrix::Zero(dq * nph, dq * nph);
  for (Index c = 0; c < dq; ++c) {
    for (Index r = 0; r < dq; ++r) {
      const Complex v = qubit_matrix(r, c);
      if (v == Complex(0.0, 0.0)) {
        continue;
      }
      for (Index n = 0; n < nph; ++n) {
        out(r * nph + n, c * nph + n) = v;
      }
    }
  }
  return out;
}

CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Dicke:
      return "Dicke";
    case SpaceKind::FullSpin:
      return "FullSpin";
    case SpaceKind::SpinResonator:
      return "SpinResonator";
  }
  return "unknown";
}

HilbertSpace::HilbertSpace(SpaceKind kind, int n_qubits, int n_max)
    : kind_(kind), n_qubits_(n_qubits), n_max_(n_max) {
  if (n_qubits < 1) {
    throw std::invalid_argument("HilbertSpace: n_qubits must be >= 1");
  }
  if (kind != SpaceKind::Dicke && n_qubits > kMaxFullQubits) {
    throw std::invalid_argument("HilbertSpace: tensor-product spaces limited to 12 qubits");
  }
  if (kind == SpaceKind::SpinResonator && n_max < 1) {
    throw std::invalid_argument("HilbertSpace: n_max must be >= 1");
  }
}

HilbertSpace HilbertSpace::dicke(int n_qubits) { return {SpaceKind::Dicke, n_qubits, 0}; }
HilbertSpace HilbertSpace::full_spin(int n_qubits) { return {SpaceKind::FullSpin, n_qubits, 0}; }
HilbertSpace HilbertSpace::spin_resonator(int n_qubits, int n_max) {
  return {SpaceKind::SpinResonator, n_qubits, n_max};
}

Index HilbertSpace::qubit_dim() const {
  return kind_ == SpaceKind::Dicke ? Index(n_qubits_ + 1) : Index(1) << n_qubits_;
}

Index HilbertSpace::dim() const { return qubit_dim() * photon_dim(); }

std::string describe(const HilbertSpace& space) {
  std::ostringstream os;
  os << to_string(space.kind()) << "(N=" << space.n_qubits();
  if (space.kind() == SpaceKind::SpinResonator) {
    os << ", n_max=" << space.n_max();
  }
  os << ", dim=" << space.dim() << ")";
  return os.str();
}

// --- Operator --------------------------------------------------------------

Operator::Operator(HilbertSpace space, CMatrix matrix, bool hermitian_hint)
    : space_(space), matrix_(std::move(matrix)), hermitian_hint_(hermitian_hint) {
  if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
    throw std::invalid_argument("Operator: matrix shape does not match " + describe(space_));
  }
  if (hermitian_hint_ && hermiticity_defect(matrix_) >= kHermitianHintTol) {
    throw std::invalid_argument("Operator: flagged Hermitian but max|A - A^dag| >= 1e-12");
  }
}

Operator Operator::identity(const HilbertSpace& space) {
  return {space, CMatrix::Identity(space.dim(), space.dim()), true};
}

Operator Operator::zero(const HilbertSpace& space) {
  return {space, CMatrix::Zero(space.dim(), space.dim()), true};
}

Operator Operator::adjoint() const { return {space_, matrix_.adjoint(), hermitian_hint_}; }

Operator& Operator::operator+=(const Operator& other) {
  if (!(space_ == other.space_)) {
    throw std::invalid_argument("Operator: space mismatch in addition");
  }
  matrix_ += other.matrix_;
  hermitian_hint_ = hermitian_hint_ && other.hermitian_hint_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  if (!(space_ == other.space_)) {
    throw std::invalid_argument("Operator: space mismatch in subtraction");
  }
  matrix_ -= other.matrix_;
  hermitian_hint_ = hermitian_hint_ && other.hermitian_hint_;
  return *this;
}

Operator& Operator::operator*=(Complex factor) {
  matrix_ *= factor;
  hermitian_hint_ = hermitian_hint_ && factor.imag() == 0.0;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  if (!(lhs.space_ == rhs.space_)) {
    throw std::invalid_argument("Operator: space mismatch in product");
  }
  return {lhs.space_, lhs.matrix_ * rhs.matrix_, false};
}

Operator commutator(const Operator& a, const Operator& b) {
  if (!(a.space() == b.space())) {
    throw std::invalid_argument("commutator: space mismatch");
  }
  return {a.space(), a.matrix() * b.matrix() - b.matrix() * a.matrix()};
}

Operator anticommutator(const Operator& a, const Operator& b) {
  if (!(a.space() == b.space())) {
    throw std::invalid_argument("anticommutator: space mismatch");
  }
  return {a.space(), a.matrix() * b.matrix() + b.matrix() * a.matrix()};
}

double max_abs(const Operator& op) { return op.matrix().cwiseAbs().maxCoeff(); }

double hermiticity_defect(const CMatrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// --- QuantumState ----------------------------------------------------------

QuantumState::QuantumState(HilbertSpace space, Representation repr, CVector psi, CMatrix rho)
    : space_(space), repr_(repr), psi_(std::move(psi)), rho_(std::move(rho)) {}

QuantumState QuantumState::pure_unchecked(HilbertSpace space, CVector psi) {
  if (psi.size() != space.dim()) {
    throw std::invalid_argument("QuantumState: vector length does not match " + describe(space));
  }
  return {space, Representation::PureVector, std::move(psi), CMatrix()};
}

QuantumState QuantumState::pure(HilbertSpace space, CVector psi) {
  QuantumState s = pure_unchecked(space, std::move(psi));
  if (std::abs(s.psi_.norm() - 1.0) >= kPureNormTol) {
    throw std::invalid_argument("QuantumState: pure state is not normalized");
  }
  return s;
}

QuantumState QuantumState::density_unchecked(HilbertSpace space, CMatrix rho) {
  if (rho.rows() != space.dim() || rho.cols() != space.dim()) {
    throw std::invalid_argument("QuantumState: density matrix shape does not match " +
                                describe(space));
  }
  return {space, Representation::DensityMatrix, CVector(), std::move(rho)};
}

QuantumState QuantumState::density(HilbertSpace space, CMatrix rho) {
  QuantumState s = density_unchecked(space, std::move(rho));
  if (std::abs(s.rho_.trace().real() - 1.0) >= kTraceTol) {
    throw std::invalid_argument("QuantumState: density matrix trace differs from 1");
  }
  if (hermiticity_defect(s.rho_) >= kRhoHermitianTol) {
    throw std::invalid_argument("QuantumState: density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= kRhoEigenTol) {
    throw std::invalid_argument("QuantumState: density matrix has a negative eigenvalue");
  }
  return s;
}

const CVector& QuantumState::vector() const {
  if (!is_pure()) {
    throw std::logic_error("QuantumState: vector() on a density matrix");
  }
  return psi_;
}

const CMatrix& QuantumState::matrix() const {
  if (is_pure()) {
    throw std::logic_error("QuantumState: matrix() on a pure state");
  }
  return rho_;
}

CMatrix QuantumState::density_matrix() const {
  if (is_pure()) {
    return psi_ * psi_.adjoint();
  }
  return rho_;
}

QuantumState QuantumState::to_density() const {
  return density_unchecked(space_, density_matrix());
}

double QuantumState::norm_or_trace() const {
  return is_pure() ? psi_.norm() : rho_.trace().real();
}

Complex QuantumState::expectation(const Operator& op) const {
  if (!(op.space() == space_)) {
    throw std::invalid_argument("expectation: operator/state space mismatch");
  }
  if (is_pure()) {
    return psi_.dot(op.matrix() * psi_);
  }
  // Tr(rho A) = sum_ij rho_ij A_ji
  return (rho_.cwiseProduct(op.matrix().transpose())).sum();
}

double QuantumState::expectation_real(const Operator& op) const { return expectation(op).real(); }

RVector QuantumState::probabilities() const {
  if (is_pure()) {
    return psi_.cwiseAbs2();
  }
  return rho_.diagonal().real();
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (!(a.space() == b.space())) {
    throw std::invalid_argument("fidelity: space mismatch");
  }
  if (a.is_pure() && b.is_pure()) {
    return std::norm(a.vector().dot(b.vector()));
  }
  if (a.is_pure()) {
    return a.vector().dot(b.matrix() * a.vector()).real();
  }
  if (b.is_pure()) {
    return b.vector().dot(a.matrix() * b.vector()).real();
  }
  const CMatrix sa = psd_sqrt(a.matrix());
  const CMatrix inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (inner + inner.adjoint()),
                                            Eigen::EigenvaluesOnly);
  const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

// --- Constructors ----------------------------------------------------------

CollectiveSpin collective_spin(const HilbertSpace& space) {
  require_qubit_kinds(space, /*allow_dicke=*/true, /*allow_resonator=*/false, "collective_spin");
  const Index d = space.dim();
  CMatrix sp = CMatrix::Zero(d, d);
  CMatrix sz = CMatrix::Zero(d, d);
  if (space.kind() == SpaceKind::Dicke) {
    const double j = space.total_spin();
    for (Index k = 0; k < d; ++k) {
      const double m = -j + static_cast<double>(k);
      sz(k, k) = m;
      if (k + 1 < d) {
        sp(k + 1, k) = std::sqrt((j - m) * (j + m + 1.0));
      }
    }
  } else {
    const int n = space.n_qubits();
    for (Index basis = 0; basis < d; ++basis) {
      const auto b = static_cast<std::uint64_t>(basis);
      sz(basis, basis) = 0.5 * (2.0 * excitation_count(b) - n);
      for (int q = 0; q < n; ++q) {
        if (!is_excited(b, q, n)) {
          const auto raised = b | (std::uint64_t{1} << qubit_bit(q, n));
          sp(static_cast<Index>(raised), basis) += 1.0;
        }
      }
    }
  }
  const CMatrix sm = sp.adjoint();
  const Complex i(0.0, 1.0);
  CMatrix sx = 0.5 * (sp + sm);
  CMatrix sy = (sp - sm) / (2.0 * i);
  return {Operator(space, sx, true), Operator(space, sy, true), Operator(space, sz, true),
          Operator(space, sp), Operator(space, sm)};
}

Operator pauli_string(const HilbertSpace& space, std::span<const PauliFactor> factors) {
  require_qubit_kinds(space, /*allow_dicke=*/false, /*allow_resonator=*/true, "pauli_string");
  const int n = space.n_qubits();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  bool hermitian = true;
  for (const auto& f : factors) {
    if (f.qubit < 0 || f.qubit >= n) {
      throw std::invalid_argument("pauli_string: qubit index out of range");
    }
    if (seen[static_cast<std::size_t>(f.qubit)]) {
      throw std::invalid_argument("pauli_string: duplicate qubit index");
    }
    seen[static_cast<std::size_t>(f.qubit)] = true;
    hermitian = hermitian && is_hermitian_axis(f.axis);
  }

  const Index dq = space.qubit_dim();
  CMatrix q = CMatrix::Zero(dq, dq);
  for (Index col = 0; col < dq; ++col) {
    auto row = static_cast<std::uint64_t>(col);
    Complex amp(1.0, 0.0);
    for (const auto& f : factors) {
      const int bit = qubit_bit(f.qubit, n);
      const auto in = static_cast<int>((row >> bit) & 1U);
      const Eigen::Matrix2cd m = single_qubit(f.axis);
      // Each single-qubit factor has at most one nonzero per column.
      const int out = m(0, in) != Complex(0.0, 0.0) ? 0 : 1;
      amp *= m(out, in);
      if (amp == Complex(0.0, 0.0)) {
        break;
      }
      row = (row & ~(std::uint64_t{1} << bit)) | (static_cast<std::uint64_t>(out) << bit);
    }
    if (amp != Complex(0.0, 0.0)) {
      q(static_cast<Index>(row), col) = amp;
    }
  }
  return {space, with_photon_identity(q, space), hermitian};
}

Operator pauli_string(const HilbertSpace& space, std::initializer_list<PauliFactor> factors) {
  return pauli_string(space, std::span<const PauliFactor>(factors.begin(), factors.size()));
}

CMatrix dicke_isometry(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxFullQubits) {
    throw std::invalid_argument("dicke_isometry: N must be in [1, 12]");
  }
  const Index full = Index(1) << n_qubits;
  CMatrix v = CMatrix::Zero(full, n_qubits + 1);
  std::vector<double> counts(static_cast<std::size_t>(n_qubits + 1), 0.0);
  for (Index b = 0; b < full; ++b) {
    counts[static_cast<std::size_t>(excitation_count(static_cast<std::uint64_t>(b)))] += 1.0;
  }
  for (Index b = 0; b < full; ++b) {
    const int k = excitation_count(static_cast<std::uint64_t>(b));
    v(b, k) = 1.0 / std::sqrt(counts[static_cast<std::size_t>(k)]);
  }
  return v;
}

Operator parity_operator(const HilbertSpace& space) {
  const Index d = space.dim();
  if (space.kind() == SpaceKind::Dicke) {
    // sigma_x on every qubit maps k excitations to N - k with unit amplitude.
    CMatrix p = CMatrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
      p(d - 1 - k, k) = 1.0;
    }
    return {space, p, true};
  }
  std::vector<PauliFactor> factors;
  factors.reserve(static_cast<std::size_t>(space.n_qubits()));
  for (int q = 0; q < space.n_qubits(); ++q) {
    factors.push_back({q, PauliAxis::X});
  }
  return pauli_string(space, factors);
}

ResonatorOps resonator_ops(const HilbertSpace& space) {
  if (space.kind() != SpaceKind::SpinResonator) {
    throw std::invalid_argument("resonator_ops: space has no resonator");
  }
  const Index nph = space.photon_dim();
  const Index dq = space.qubit_dim();
  CMatrix a = CMatrix::Zero(space.dim(), space.dim());
  for (Index q = 0; q < dq; ++q) {
    for (Index n = 1; n < nph; ++n) {
      a(q * nph + n - 1, q * nph + n) = std::sqrt(static_cast<double>(n));
    }
  }
  CMatrix ad = a.adjoint();
  return {Operator(space, a), Operator(space, ad)};
}

int excitation_count(std::uint64_t basis) { return std::popcount(basis); }

QuantumState product_plus_state(const HilbertSpace& space) {
  CVector psi = CVector::Zero(space.dim());
  const int n = space.n_qubits();
  if (space.kind() == SpaceKind::Dicke) {
    // |+>^N = 2^{-N/2} sum_k sqrt(C(N,k)) |k>
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
      psi(k) = std::sqrt(binom) * std::pow(2.0, -0.5 * n);
      binom = binom * (n - k) / (k + 1);
    }
  } else {
    const double amp = std::pow(2.0, -0.5 * n);
    const Index nph = space.photon_dim();
    for (Index q = 0; q < space.qubit_dim(); ++q) {
      psi(q * nph) = amp;
    }
  }
  return QuantumState::pure(space, std::move(psi));
}

QuantumState ghz_state(const HilbertSpace& space, double phase) {
  if (space.kind() == SpaceKind::SpinResonator) {
    throw std::invalid_argument("ghz_state: qubit-only spaces required");
  }
  CVector psi = CVector::Zero(space.dim());
  psi(0) = std::numbers::sqrt2 / 2.0;
  psi(space.dim() - 1) = std::polar(std::numbers::sqrt2 / 2.0, phase);
  return QuantumState::pure(space, std::move(psi));
}

QuantumState basis_state(const HilbertSpace& space, std::uint64_t index) {
  if (static_cast<Index>(index) >= space.qubit_dim()) {
    throw std::invalid_argument("basis_state: index out of range");
  }
  CVector psi = CVector::Zero(space.dim());
  psi(static_cast<Index>(index) * space.photon_dim()) = 1.0;
  return QuantumState::pure(space, std::move(psi));
}

QuantumState lift_to_full(const QuantumState& state) {
  if (state.space().kind() != SpaceKind::Dicke) {
    return state;
  }
  const auto full = HilbertSpace::full_spin(state.space().n_qubits());
  const CMatrix v = dicke_isometry(state.space().n_qubits());
  if (state.is_pure()) {
    return QuantumState::pure_unchecked(full, v * state.vector());
  }
  return QuantumState::density_unchecked(full, v * state.matrix() * v.adjoint());
}

QuantumState reduce_to_qubits(const QuantumState& state) {
  const auto& space = state.space();
  if (space.kind() != SpaceKind::SpinResonator) {
    return state;
  }
  const auto qubits = HilbertSpace::full_spin(space.n_qubits());
  const Index dq = space.qubit_dim();
  const Index nph = space.photon_dim();
  CMatrix out = CMatrix::Zero(dq, dq);
  if (state.is_pure()) {
    // psi viewed as a dq x nph matrix (photon index fastest).
    const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(state.vector().data(), dq, nph);
    out = m * m.adjoint();
  } else {
    const CMatrix& rho = state.matrix();
    for (Index n = 0; n < nph; ++n) {
      for (Index c = 0; c < dq; ++c) {
        for (Index r = 0; r < dq; ++r) {
          out(r, c) += rho(r * nph + n, c * nph + n);
        }
      }
    }
  }
  return QuantumState::density_unchecked(qubits, std::move(out));
}

}  // namespace lmg
