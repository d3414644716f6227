#include "lmg/observables.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lmg {

namespace {

const double kSqrt3 = std::sqrt(3.0);

// Applies a 2x2 operator to `qubit` from the left on every column of m
// (a state vector is a single column). Rows index the 2^N basis.
void apply_qubit_left(CMatrix& m, int qubit, int n_qubits, const Eigen::Matrix2cd& op) {
  const Index stride = Index(1) << qubit_bit(qubit, n_qubits);
  const Index rows = m.rows();
  for (Index c = 0; c < m.cols(); ++c) {
    Complex* col = m.col(c).data();
    for (Index base = 0; base < rows; base += 2 * stride) {
      for (Index off = 0; off < stride; ++off) {
        const Index i0 = base + off;
        const Index i1 = i0 + stride;
        const Complex a0 = col[i0];
        const Complex a1 = col[i1];
        col[i0] = op(0, 0) * a0 + op(0, 1) * a1;
        col[i1] = op(1, 0) * a0 + op(1, 1) * a1;
      }
    }
  }
}

// Qubit-only view of a state: Dicke states are lifted, resonators traced out.
QuantumState full_qubit_state(const QuantumState& state) {
  return lift_to_full(reduce_to_qubits(state));
}

// Tr[rho O_0 (x) O_1 (x) ...] with O the same 2x2 on every qubit, or a single
// qubit when `only` >= 0.
Complex product_expectation(const QuantumState& full, const Eigen::Matrix2cd& op, int only = -1) {
  const int n = full.space().n_qubits();
  if (full.is_pure()) {
    CMatrix v = full.vector();
    for (int q = 0; q < n; ++q) {
      if (only < 0 || q == only) {
        apply_qubit_left(v, q, n, op);
      }
    }
    return full.vector().dot(v.col(0));
  }
  CMatrix m = full.matrix();
  for (int q = 0; q < n; ++q) {
    if (only < 0 || q == only) {
      apply_qubit_left(m, q, n, op);
    }
  }
  return m.trace();
}

Eigen::Matrix2cd sigma_beta(double beta) {
  Eigen::Matrix2cd s;
  // (g, e) basis with sigma_y = i|g><e| - i|e><g|: <g|s|e> = e^{i beta}
  s << 0.0, std::polar(1.0, beta), std::polar(1.0, -beta), 0.0;
  return s;
}

Eigen::Matrix2cd wigner_kernel(double theta, double phi, bool normalized) {
  Eigen::Matrix2cd pi = Eigen::Matrix2cd::Zero();
  pi(0, 0) = 1.0 + kSqrt3;  // sigma_z |g> = -|g>
  pi(1, 1) = 1.0 - kSqrt3;
  if (normalized) {
    pi *= 0.5;
  }
  const Eigen::Matrix2cd u = wigner_rotation(theta, phi);
  return u * pi * u.adjoint();
}

// Diagonal of prod_j (1 - sqrt(3) Z_j) for n excitations.
double kernel_diagonal(int excitations, int n_qubits, bool normalized) {
  const double scale = normalized ? 0.5 : 1.0;
  return std::pow(scale * (1.0 - kSqrt3), excitations) *
         std::pow(scale * (1.0 + kSqrt3), n_qubits - excitations);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace

std::vector<double> excitation_populations(const QuantumState& state) {
  const auto& space = state.space();
  const int n = space.n_qubits();
  std::vector<double> pops(static_cast<std::size_t>(n + 1), 0.0);
  const RVector p = state.probabilities();
  if (space.kind() == SpaceKind::Dicke) {
    for (int k = 0; k <= n; ++k) {
      pops[static_cast<std::size_t>(k)] = p(k);
    }
    return pops;
  }
  const Index nph = space.photon_dim();
  for (Index i = 0; i < p.size(); ++i) {
    const auto q = static_cast<std::uint64_t>(i / nph);
    pops[static_cast<std::size_t>(excitation_count(q))] += p(i);
  }
  return pops;
}

std::vector<double> bitstring_distribution(const QuantumState& state) {
  const auto& space = state.space();
  const int n = space.n_qubits();
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> dist(full, 0.0);
  const RVector p = state.probabilities();
  if (space.kind() == SpaceKind::Dicke) {
    for (std::size_t b = 0; b < full; ++b) {
      const int k = excitation_count(b);
      dist[b] = p(k) / binomial(n, k);
    }
    return dist;
  }
  const Index nph = space.photon_dim();
  for (Index i = 0; i < p.size(); ++i) {
    dist[static_cast<std::size_t>(i / nph)] += p(i);
  }
  return dist;
}

double longitudinal_correlation(const QuantumState& state) {
  const int n = state.space().n_qubits();
  if (n < 2) {
    throw std::invalid_argument("longitudinal_correlation: needs at least two qubits");
  }
  // For a string with k excitations, sum_{j<l} z_j z_l = ((2k - N)^2 - N) / 2.
  const auto pops = excitation_populations(state);
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double m = 2.0 * k - n;
    sum += pops[static_cast<std::size_t>(k)] * 0.5 * (m * m - n);
  }
  return sum / (0.5 * n * (n - 1));
}

double transverse_correlation(const QuantumState& state, double beta) {
  const QuantumState full = full_qubit_state(state);
  const int n = full.space().n_qubits();
  const Eigen::Matrix2cd s = sigma_beta(beta);
  const double joint = product_expectation(full, s).real();
  double product = 1.0;
  for (int q = 0; q < n; ++q) {
    product *= product_expectation(full, s, q).real();
  }
  return joint - product;
}

Complex coherence_element(const QuantumState& state) {
  const QuantumState q = reduce_to_qubits(state);
  const Index last = q.space().dim() - 1;
  if (q.is_pure()) {
    return q.vector()(last) * std::conj(q.vector()(0));
  }
  return q.matrix()(last, 0);
}

FringeFit fringe_fit(std::span<const double> betas, std::span<const double> values, int n_qubits) {
  if (betas.size() != values.size()) {
    throw std::invalid_argument("fringe_fit: betas and values differ in length");
  }
  if (betas.size() < 3) {
    throw std::invalid_argument("fringe_fit: at least three samples required");
  }
  const auto rows = static_cast<Index>(betas.size());
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd y(rows);
  for (Index i = 0; i < rows; ++i) {
    const double arg = n_qubits * betas[static_cast<std::size_t>(i)];
    design(i, 0) = std::cos(arg);
    design(i, 1) = std::sin(arg);
    design(i, 2) = 1.0;
    y(i) = values[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    throw std::invalid_argument("fringe_fit: degenerate design matrix (betas do not span a fringe)");
  }
  const Eigen::Vector3d coef = qr.solve(y);
  FringeFit fit;
  fit.amplitude = std::hypot(coef(0), coef(1));
  double gamma = std::atan2(coef(1), coef(0));
  if (gamma >= std::numbers::pi) {
    gamma -= 2.0 * std::numbers::pi;
  }
  fit.phase = gamma;
  fit.offset = coef(2);
  fit.residual_rms = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(rows));
  fit.coherence_magnitude = 0.5 * fit.amplitude;
  return fit;
}

std::vector<double> default_beta_grid(int count) { return linspace_open(0.0, std::numbers::pi, count); }

std::vector<double> linspace_closed(double lo, double hi, int count) {
  if (count < 1) {
    throw std::invalid_argument("linspace_closed: count must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return out;
}

std::vector<double> linspace_open(double lo, double hi, int count) {
  if (count < 1) {
    throw std::invalid_argument("linspace_open: count must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / count;
  }
  return out;
}

Eigen::Matrix2cd wigner_rotation(double theta, double phi) {
  // exp(-i theta/2 n.sigma) with n = (sin phi, -cos phi, 0)
  const Complex i(0.0, 1.0);
  const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0.0, 1.0, 1.0, 0.0).finished();
  const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0.0, i, -i, 0.0).finished();
  const Eigen::Matrix2cd gen = std::sin(phi) * sx - std::cos(phi) * sy;
  return std::cos(0.5 * theta) * Eigen::Matrix2cd::Identity() - i * std::sin(0.5 * theta) * gen;
}

QuantumState apply_to_every_qubit(const QuantumState& state, const Eigen::Matrix2cd& u) {
  if (state.space().kind() != SpaceKind::FullSpin) {
    throw std::invalid_argument("apply_to_every_qubit: FullSpin state required");
  }
  const int n = state.space().n_qubits();
  if (state.is_pure()) {
    CMatrix v = state.vector();
    for (int q = 0; q < n; ++q) {
      apply_qubit_left(v, q, n, u);
    }
    return QuantumState::pure_unchecked(state.space(), v.col(0));
  }
  CMatrix m = state.matrix();
  for (int q = 0; q < n; ++q) {
    apply_qubit_left(m, q, n, u);
  }
  CMatrix mt = m.adjoint();
  for (int q = 0; q < n; ++q) {
    apply_qubit_left(mt, q, n, u);
  }
  return QuantumState::density_unchecked(state.space(), mt.adjoint());
}

double wigner_point(const QuantumState& state, double theta, double phi, bool normalized) {
  const QuantumState q = reduce_to_qubits(state);
  if (q.space().kind() == SpaceKind::Dicke) {
    return wigner_point_collective(q, theta, phi, normalized);
  }
  const Complex w = product_expectation(q, wigner_kernel(theta, phi, normalized));
  return w.real();
}

double wigner_point_collective(const QuantumState& state, double theta, double phi,
                               bool normalized) {
  const QuantumState q = reduce_to_qubits(state);
  const auto s = collective_spin(q.space());
  const Complex i(0.0, 1.0);
  // sin(phi) Sx - cos(phi) Sy is Hermitian; exponentiate through its spectrum.
  const CMatrix gen = std::sin(phi) * s.sx.matrix() - std::cos(phi) * s.sy.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gen);
  CVector phases(es.eigenvalues().size());
  for (Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::exp(-i * theta * es.eigenvalues()(k));
  }
  const CMatrix r = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  const int n = q.space().n_qubits();
  RVector kernel(q.space().dim());
  for (Index k = 0; k < kernel.size(); ++k) {
    const int exc = q.space().kind() == SpaceKind::Dicke
                        ? static_cast<int>(k)
                        : excitation_count(static_cast<std::uint64_t>(k));
    kernel(k) = kernel_diagonal(exc, n, normalized);
  }
  // Tr[rho R Pi R^dag] = sum_k Pi_k (R^dag rho R)_kk
  if (q.is_pure()) {
    const CVector rotated = r.adjoint() * q.vector();
    return rotated.cwiseAbs2().dot(kernel);
  }
  const CMatrix rotated = r.adjoint() * q.matrix() * r;
  return rotated.diagonal().real().dot(kernel);
}

WignerGrid wigner(const QuantumState& state, std::span<const double> thetas,
                  std::span<const double> phis, bool normalized) {
  if (thetas.empty() || phis.empty()) {
    throw std::invalid_argument("wigner: empty grid");
  }
  const QuantumState q = reduce_to_qubits(state);
  WignerGrid grid;
  grid.thetas.assign(thetas.begin(), thetas.end());
  grid.phis.assign(phis.begin(), phis.end());
  grid.kernel_normalized = normalized;
  grid.values.resize(static_cast<Index>(thetas.size()), static_cast<Index>(phis.size()));
  for (std::size_t a = 0; a < thetas.size(); ++a) {
    for (std::size_t b = 0; b < phis.size(); ++b) {
      grid.values(static_cast<Index>(a), static_cast<Index>(b)) =
          wigner_point(q, thetas[a], phis[b], normalized);
    }
  }
  return grid;
}

GhzFidelity ghz_fidelity(const QuantumState& state, std::optional<double> gamma) {
  const QuantumState q = reduce_to_qubits(state);
  const Complex coh = coherence_element(q);
  const RVector p = q.probabilities();
  GhzFidelity out;
  out.population_form = 0.5 * (p(0) + p(p.size() - 1)) + std::abs(coh);
  out.gamma = gamma.value_or(std::arg(coh));
  out.overlap = fidelity(q, ghz_state(q.space(), out.gamma));
  return out;
}

std::vector<double> apply_readout_error(std::span<const double> distribution,
                                        const DeviceSpec& device) {
  const int n = device.n_qubits;
  const std::size_t full = std::size_t{1} << n;
  if (distribution.size() != full) {
    throw std::invalid_argument("apply_readout_error: distribution length must be 2^N");
  }
  std::vector<double> cur(distribution.begin(), distribution.end());
  std::vector<double> next(full);
  for (int q = 0; q < n; ++q) {
    const double f0 = device.f_g[static_cast<std::size_t>(q)];
    const double f1 = device.f_e[static_cast<std::size_t>(q)];
    const std::size_t mask = std::size_t{1} << qubit_bit(q, n);
    for (std::size_t b = 0; b < full; ++b) {
      if ((b & mask) != 0U) {
        continue;
      }
      const double pg = cur[b];
      const double pe = cur[b | mask];
      next[b] = f0 * pg + (1.0 - f1) * pe;
      next[b | mask] = (1.0 - f0) * pg + f1 * pe;
    }
    cur.swap(next);
  }
  return cur;
}

std::vector<double> populations_from_distribution(std::span<const double> distribution,
                                                  int n_qubits) {
  if (distribution.size() != (std::size_t{1} << n_qubits)) {
    throw std::invalid_argument("populations_from_distribution: length must be 2^N");
  }
  std::vector<double> pops(static_cast<std::size_t>(n_qubits + 1), 0.0);
  for (std::size_t b = 0; b < distribution.size(); ++b) {
    pops[static_cast<std::size_t>(excitation_count(b))] += distribution[b];
  }
  return pops;
}

}  // namespace lmg
