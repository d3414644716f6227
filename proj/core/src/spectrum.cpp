#include "lmg/spectrum.hpp"

#include "lmg/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmg {

namespace {

constexpr double kCommuteTol = 1e-10;
constexpr double kDegenerateRelTol = 1e-9;

// Indices of the two extremal eigenvalues on the target side, outermost first.
std::pair<Index, Index> extremal_pair(Index dim, ExtremalTarget target) {
  if (target == ExtremalTarget::HighestOfEffective) {
    return {dim - 1, dim - 2};
  }
  return {0, 1};
}

// Extremal eigenvalue of H restricted to each parity sector (+1 first). The
// two extremal levels always carry opposite parity, so their difference
// resolves splittings far below the degeneracy tolerance.
std::pair<double, double> sector_extremes(const CMatrix& h, const CMatrix& parity,
                                          ExtremalTarget target) {
  Eigen::SelfAdjointEigenSolver<CMatrix> ps(0.5 * (parity + parity.adjoint()));
  double out[2] = {0.0, 0.0};
  for (int s = 0; s < 2; ++s) {
    const double label = s == 0 ? 1.0 : -1.0;
    std::vector<Index> cols;
    for (Index k = 0; k < ps.eigenvalues().size(); ++k) {
      if (std::abs(ps.eigenvalues()(k) - label) < 0.5) cols.push_back(k);
    }
    if (cols.empty()) {
      out[s] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    CMatrix basis(h.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      basis.col(static_cast<Index>(c)) = ps.eigenvectors().col(cols[c]);
    }
    const CMatrix hs = basis.adjoint() * h * basis;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hs + hs.adjoint()), Eigen::EigenvaluesOnly);
    out[s] = target == ExtremalTarget::HighestOfEffective ? es.eigenvalues().maxCoeff()
                                                          : es.eigenvalues().minCoeff();
  }
  return {out[0], out[1]};
}

}  // namespace

ParityEigensystem eigendecompose_with_parity(const Operator& h, const Operator& parity) {
  const double scale = std::max(1.0, max_abs(h));
  if (max_abs(commutator(h, parity)) > kCommuteTol * scale) {
    throw std::invalid_argument("eigendecompose_with_parity: H and P do not commute");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
  ParityEigensystem out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  const Index dim = out.eigenvalues.size();
  const double tol = kDegenerateRelTol * std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());

  Index start = 0;
  while (start < dim) {
    Index end = start + 1;
    while (end < dim && out.eigenvalues(end) - out.eigenvalues(end - 1) < tol) {
      ++end;
    }
    const Index block = end - start;
    if (block > 1) {
      const CMatrix v = out.eigenvectors.middleCols(start, block);
      CMatrix pb = v.adjoint() * parity.matrix() * v;
      Eigen::SelfAdjointEigenSolver<CMatrix> ps(0.5 * (pb + pb.adjoint()));
      out.eigenvectors.middleCols(start, block) = v * ps.eigenvectors();
      const double mean = out.eigenvalues.segment(start, block).mean();
      out.eigenvalues.segment(start, block).setConstant(mean);
    }
    start = end;
  }

  out.parity_expectation.resize(dim);
  out.parity.resize(static_cast<std::size_t>(dim));
  for (Index k = 0; k < dim; ++k) {
    const auto v = out.eigenvectors.col(k);
    const double p = v.dot(parity.matrix() * v).real();
    out.parity_expectation(k) = p;
    out.parity[static_cast<std::size_t>(k)] = p >= 0.0 ? 1 : -1;
  }
  return out;
}

SpectrumScan degeneracy_scan(int n_qubits, double lam, std::span<const double> omega_values,
                             ExtremalTarget target) {
  if (lam == 0.0) {
    throw std::invalid_argument("degeneracy_scan: lambda must be nonzero");
  }
  const auto space = HilbertSpace::dicke(n_qubits);
  const Operator parity = parity_operator(space);
  const int sign = target == ExtremalTarget::HighestOfEffective ? 1 : -1;
  SpectrumScan scan;
  scan.n_qubits = n_qubits;
  scan.lam = lam;
  scan.target = target;
  for (double omega : omega_values) {
    if (omega < 0.0) {
      throw std::invalid_argument("degeneracy_scan: omega values must be >= 0");
    }
    const Operator h = lmg_hamiltonian(space, omega, lam, sign);
    const auto sys = eigendecompose_with_parity(h, parity);
    SpectrumPoint p;
    p.control = omega / lam;
    p.omega = omega;
    p.eigenvalues = sys.eigenvalues;
    p.parity = sys.parity;
    const Index dim = sys.eigenvalues.size();
    if (dim >= 2) {
      const auto [outer, inner] = extremal_pair(dim, target);
      const auto [even, odd] = sector_extremes(h.matrix(), parity.matrix(), target);
      p.splitting = std::isnan(even) || std::isnan(odd)
                        ? std::abs(sys.eigenvalues(outer) - sys.eigenvalues(inner))
                        : std::abs(even - odd);
      if (dim >= 3) {
        const Index third = target == ExtremalTarget::HighestOfEffective ? dim - 3 : 2;
        p.gap_to_rest = std::abs(sys.eigenvalues(inner) - sys.eigenvalues(third));
      }
    }
    scan.points.push_back(std::move(p));
  }
  return scan;
}

double PerturbativeShifts::eta_at(double m) const {
  for (std::size_t k = 0; k < m_values.size(); ++k) {
    if (std::abs(m_values[k] - m) < 1e-9) {
      return eta[k];
    }
  }
  throw std::out_of_range("PerturbativeShifts: m outside -J..J");
}

PerturbativeShifts perturbative_shifts(int n_qubits, double omega, double lam, int sign) {
  if (n_qubits < 1) {
    throw std::invalid_argument("perturbative_shifts: N must be >= 1");
  }
  if (lam == 0.0) {
    throw std::invalid_argument("perturbative_shifts: lambda must be nonzero");
  }
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("perturbative_shifts: sign must be +1 or -1");
  }
  if (n_qubits % 2 != 0) {
    throw std::invalid_argument(
        "perturbative_shifts: lambda_m vanishes at m = -1/2 for odd N; the m = +-1/2 doublet "
        "needs degenerate perturbation theory");
  }
  PerturbativeShifts s;
  s.j = 0.5 * n_qubits;
  s.omega = omega;
  s.lam = lam;
  s.sign = sign;
  const int levels = n_qubits + 1;
  for (int k = 0; k < levels - 1; ++k) {
    const double m = -s.j + k;
    s.omega_m.push_back(0.5 * omega * std::sqrt((s.j - m) * (s.j + m + 1.0)));
    s.lambda_m.push_back((2.0 * m + 1.0) * lam);
  }
  for (int k = 0; k < levels; ++k) {
    const double m = -s.j + k;
    double eta = 0.0;
    // Coupling upward to m+1 and downward to m-1; at m = +-J only one exists.
    if (k < levels - 1) {
      eta += s.omega_m[static_cast<std::size_t>(k)] * s.omega_m[static_cast<std::size_t>(k)] /
             s.lambda_m[static_cast<std::size_t>(k)];
    }
    if (k > 0) {
      eta -= s.omega_m[static_cast<std::size_t>(k - 1)] *
             s.omega_m[static_cast<std::size_t>(k - 1)] /
             s.lambda_m[static_cast<std::size_t>(k - 1)];
    }
    s.m_values.push_back(m);
    s.eta.push_back(-static_cast<double>(sign) * eta);
  }
  return s;
}

std::vector<ShiftComparison> compare_perturbative_shifts(int n_qubits, double omega, double lam,
                                                         int sign) {
  const PerturbativeShifts pt = perturbative_shifts(n_qubits, omega, lam, sign);
  const auto space = HilbertSpace::dicke(n_qubits);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(lmg_hamiltonian(space, omega, lam, sign).matrix(),
                                            Eigen::EigenvaluesOnly);
  // Unperturbed levels sign * lam m^2, sorted ascending together with their m.
  std::vector<std::pair<double, double>> bare;
  for (double m : pt.m_values) {
    bare.emplace_back(sign * lam * m * m, m);
  }
  std::stable_sort(bare.begin(), bare.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ShiftComparison> out;
  for (std::size_t k = 0; k < bare.size(); ++k) {
    ShiftComparison c;
    c.m = bare[k].second;
    c.exact = es.eigenvalues()(static_cast<Index>(k)) - bare[k].first;
    c.predicted = pt.eta_at(c.m);
    c.relative_error = c.predicted == 0.0 ? std::abs(c.exact)
                                          : std::abs(c.exact - c.predicted) / std::abs(c.predicted);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.m < b.m; });
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& partner = out[out.size() - 1 - k];
    const double mean = 0.5 * (out[k].exact + partner.exact);
    out[k].doublet_relative_error = out[k].predicted == 0.0
                                        ? std::abs(mean)
                                        : std::abs(mean - out[k].predicted) / std::abs(out[k].predicted);
  }
  return out;
}

std::vector<AdiabaticPoint> adiabaticity_overlap(const TrajectoryRecord& trajectory,
                                                 const HamiltonianFn& hamiltonian,
                                                 ExtremalTarget target, double degeneracy_tol) {
  std::vector<AdiabaticPoint> out;
  CVector tracked;
  for (const auto& cp : trajectory.checkpoints) {
    if (!cp.state.is_pure()) {
      throw std::invalid_argument("adiabaticity_overlap: closed-system pure trajectory required");
    }
    const Operator h = hamiltonian(cp.time);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
    const Index dim = es.eigenvalues().size();
    const CVector& psi = cp.state.vector();
    AdiabaticPoint p;
    p.time = cp.time;
    if (dim < 2) {
      p.overlap = std::norm(es.eigenvectors().col(0).dot(psi));
      out.push_back(p);
      continue;
    }
    const auto [outer, inner] = extremal_pair(dim, target);
    const CVector v_outer = es.eigenvectors().col(outer);
    const CVector v_inner = es.eigenvectors().col(inner);
    if (std::abs(es.eigenvalues()(outer) - es.eigenvalues()(inner)) < degeneracy_tol) {
      p.eigenspace_dim = 2;
      p.overlap = std::norm(v_outer.dot(psi)) + std::norm(v_inner.dot(psi));
      tracked.resize(0);
    } else {
      CVector chosen = v_outer;
      if (tracked.size() == dim && std::abs(tracked.dot(v_inner)) > std::abs(tracked.dot(v_outer))) {
        chosen = v_inner;
      }
      // Fix the gauge so successive overlaps are phase-continuous.
      if (tracked.size() == dim) {
        const Complex ph = tracked.dot(chosen);
        if (std::abs(ph) > 0.0) {
          chosen *= std::conj(ph) / std::abs(ph);
        }
      }
      p.overlap = std::norm(chosen.dot(psi));
      tracked = chosen;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace lmg
