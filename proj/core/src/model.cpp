#include "lmg/model.hpp"

#include <cmath>
#include <sstream>

namespace lmg {

namespace {

constexpr double kDispersiveFactor = 5.0;

void require_size(const std::vector<double>& v, int n, const char* field) {
  if (static_cast<int>(v.size()) != n) {
    std::ostringstream os;
    os << "DeviceSpec." << field << ": expected " << n << " entries, got " << v.size();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void DeviceSpec::validate() const {
  if (n_qubits < 1) {
    throw std::invalid_argument("DeviceSpec.n_qubits: must be >= 1");
  }
  require_size(xi, n_qubits, "xi");
  require_size(t1, n_qubits, "t1");
  require_size(t2, n_qubits, "t2");
  require_size(f_g, n_qubits, "f_g");
  require_size(f_e, n_qubits, "f_e");
  for (int j = 0; j < n_qubits; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (!(xi[k] > 0.0)) {
      throw std::invalid_argument("DeviceSpec.xi: couplings must be positive");
    }
    if (!(t1[k] > 0.0) || !(t2[k] > 0.0)) {
      throw std::invalid_argument("DeviceSpec.t1/t2: coherence times must be positive");
    }
    if (!(f_g[k] > 0.0 && f_g[k] <= 1.0) || !(f_e[k] > 0.0 && f_e[k] <= 1.0)) {
      throw std::invalid_argument("DeviceSpec.f_g/f_e: readout fidelities must lie in (0, 1]");
    }
  }
  if (crosstalk_b.rows() != n_qubits || crosstalk_b.cols() != n_qubits) {
    throw std::invalid_argument("DeviceSpec.crosstalk_b: must be N x N");
  }
  if ((crosstalk_b - crosstalk_b.transpose()).cwiseAbs().maxCoeff() > 1e-15 ||
      crosstalk_b.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("DeviceSpec.crosstalk_b: must be symmetric with zero diagonal");
  }
  double max_xi = 0.0;
  for (double x : xi) {
    max_xi = std::max(max_xi, x);
  }
  if (!(std::abs(omega_o - omega_b) > kDispersiveFactor * max_xi)) {
    throw std::invalid_argument(
        "DeviceSpec.omega_o: not dispersive, |omega_o - omega_b| must exceed 5 max(xi)");
  }
}

bool DeviceSpec::homogeneous_coupling(double tol) const {
  for (double x : xi) {
    if (std::abs(x - xi.front()) > tol) {
      return false;
    }
  }
  return crosstalk_b.cwiseAbs().maxCoeff() <= tol;
}

void QuenchSchedule::validate() const {
  if (!(omega0 >= 0.0)) {
    throw std::invalid_argument("QuenchSchedule.omega0: must be >= 0");
  }
  if (!(tf > 0.0)) {
    throw std::invalid_argument("QuenchSchedule.tf: must be > 0");
  }
  if (!(duration >= 0.0)) {
    throw std::invalid_argument("QuenchSchedule.duration: must be >= 0");
  }
  if (drive_sign != 1 && drive_sign != -1) {
    throw std::invalid_argument("QuenchSchedule.drive_sign: must be +1 or -1");
  }
}

double effective_coupling(double xi, double detuning) {
  if (detuning == 0.0) {
    throw std::invalid_argument("effective_coupling: zero detuning");
  }
  return xi * xi / std::abs(detuning);
}

Operator lmg_hamiltonian(const HilbertSpace& space, double omega, double lam, int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("lmg_hamiltonian: sign must be +1 or -1");
  }
  const auto s = collective_spin(space);
  CMatrix h = omega * s.sx.matrix() + lam * (s.sz.matrix() * s.sz.matrix());
  h *= static_cast<double>(sign);
  h = 0.5 * (h + h.adjoint());
  return {space, std::move(h), true};
}

Operator swap_frame_hamiltonian(const HilbertSpace& space, double omega, double lam, double t) {
  const auto s = collective_spin(space);
  const CMatrix& sx = s.sx.matrix();
  const CMatrix& sy = s.sy.matrix();
  const CMatrix& sz = s.sz.matrix();
  const double c = std::cos(2.0 * omega * t);
  const double sn = std::sin(2.0 * omega * t);
  CMatrix h = 0.5 * lam * (sx * sx - c * (sz * sz - sy * sy) + sn * (sz * sy + sy * sz));
  h = 0.5 * (h + h.adjoint());
  return {space, std::move(h), true};
}

CircuitQedTerms circuit_qed_terms(const DeviceSpec& device, int n_max) {
  device.validate();
  const int n = device.n_qubits;
  const auto space = HilbertSpace::spin_resonator(n, n_max);
  const auto res = resonator_ops(space);
  const CMatrix& a = res.a.matrix();
  const CMatrix& ad = res.a_dagger.matrix();

  CMatrix h = (device.omega_b - device.omega_o) * (ad * a);
  CMatrix drive = CMatrix::Zero(space.dim(), space.dim());
  const double qubit_detuning = device.omega_q - device.omega_o;
  for (int j = 0; j < n; ++j) {
    const CMatrix sp = pauli_string(space, {{j, PauliAxis::Plus}}).matrix();
    const CMatrix sm = sp.adjoint();
    h += qubit_detuning * (sp * sm);
    h += device.xi[static_cast<std::size_t>(j)] * (sp * a + sm * ad);
    drive += 0.5 * pauli_string(space, {{j, PauliAxis::X}}).matrix();
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double b = device.crosstalk_b(j, k);
      if (b == 0.0) {
        continue;
      }
      const CMatrix flip = pauli_string(space, {{j, PauliAxis::Plus}, {k, PauliAxis::Minus}}).matrix();
      h += b * (flip + flip.adjoint());
    }
  }
  h = 0.5 * (h + h.adjoint());
  return {Operator(space, std::move(h), true), Operator(space, std::move(drive), true)};
}

Operator circuit_qed_hamiltonian(const DeviceSpec& device, double omega_drive, int n_max) {
  auto terms = circuit_qed_terms(device, n_max);
  return terms.static_part + omega_drive * terms.drive_part;
}

Operator excitation_number_operator(const HilbertSpace& space) {
  if (space.kind() != SpaceKind::SpinResonator) {
    throw std::invalid_argument("excitation_number_operator: SpinResonator space required");
  }
  const auto res = resonator_ops(space);
  CMatrix num = res.a_dagger.matrix() * res.a.matrix();
  const Index nph = space.photon_dim();
  for (Index q = 0; q < space.qubit_dim(); ++q) {
    for (Index p = 0; p < nph; ++p) {
      num(q * nph + p, q * nph + p) += excitation_count(static_cast<std::uint64_t>(q));
    }
  }
  return {space, std::move(num), true};
}

double quench_omega(double tau, const QuenchSchedule& schedule) {
  if (tau < 0.0) {
    throw std::invalid_argument("quench_omega: negative time");
  }
  // Stage times t + dt can land a rounding error past the end of the drive.
  if (tau > schedule.duration + 1e-9) {
    return 0.0;
  }
  return schedule.omega0 * std::exp(-tau / schedule.tf);
}

double pure_dephasing_rate(double t1, double t2) { return 1.0 / t2 - 1.0 / (2.0 * t1); }

LindbladSet lindblad_operators(const DeviceSpec& device, const NoiseSpec& noise,
                               const HilbertSpace& space) {
  if (space.kind() == SpaceKind::Dicke) {
    throw std::invalid_argument("lindblad_operators: per-qubit noise needs a tensor-product space");
  }
  if (space.n_qubits() != device.n_qubits) {
    throw std::invalid_argument("lindblad_operators: device/space qubit count mismatch");
  }
  LindbladSet set;
  for (int j = 0; j < device.n_qubits; ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (noise.enable_t1) {
      const double rate = 1.0 / device.t1[k];
      set.ops.push_back({std::sqrt(rate) * pauli_string(space, {{j, PauliAxis::Minus}}), rate,
                         "decay_q" + std::to_string(j)});
    }
    if (noise.enable_dephasing) {
      double rate = pure_dephasing_rate(device.t1[k], device.t2[k]);
      if (rate < 0.0) {
        std::ostringstream os;
        os << "qubit " << j << ": T2 > 2 T1, pure dephasing rate clamped to 0";
        set.warnings.push_back(os.str());
        rate = 0.0;
      }
      if (rate > 0.0) {
        set.ops.push_back({std::sqrt(0.5 * rate) * pauli_string(space, {{j, PauliAxis::Z}}), rate,
                           "dephasing_q" + std::to_string(j)});
      }
    }
  }
  return set;
}

double mean_pair_coupling(const DeviceSpec& device) {
  const int n = device.n_qubits;
  if (n < 2) {
    return device.xi.front() * device.xi.front() / device.detuning();
  }
  double sum = 0.0;
  int pairs = 0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      sum += device.xi[static_cast<std::size_t>(j)] * device.xi[static_cast<std::size_t>(k)] /
                 device.detuning() +
             device.crosstalk_b(j, k);
      ++pairs;
    }
  }
  return sum / pairs;
}

DeviceSpec paper_device_preset() {
  DeviceSpec d;
  d.n_qubits = 6;
  for (double x : {19.56, 19.78, 15.98, 19.24, 19.88, 14.51}) {
    d.xi.push_back(units::mhz(x));
  }
  for (double t : {17.8, 19.1, 15.5, 13.7, 27.5, 22.9}) {
    d.t1.push_back(units::us(t));
  }
  for (double t : {3.4, 3.6, 1.7, 3.4, 2.0, 4.7}) {
    d.t2.push_back(units::us(t));
  }
  d.f_g = {0.85, 0.93, 0.85, 0.83, 0.88, 0.84};
  d.f_e = {0.82, 0.83, 0.85, 0.70, 0.81, 0.81};
  d.omega_b = units::ghz(5.796);
  d.omega_o = units::ghz(5.6895);
  d.crosstalk_b = Eigen::MatrixXd::Constant(6, 6, units::mhz(-0.27));
  d.crosstalk_b.diagonal().setZero();
  d.omega_q = d.omega_o + std::abs(mean_pair_coupling(d));
  return d;
}

DeviceSpec homogeneous_device(int n_qubits, double xi, double detuning) {
  DeviceSpec d;
  d.n_qubits = n_qubits;
  const auto n = static_cast<std::size_t>(n_qubits);
  d.xi.assign(n, xi);
  d.t1.assign(n, units::us(20.0));
  d.t2.assign(n, units::us(3.0));
  d.f_g.assign(n, 1.0);
  d.f_e.assign(n, 1.0);
  d.omega_b = units::ghz(5.796);
  d.omega_o = d.omega_b + detuning;
  d.omega_q = d.omega_o + effective_coupling(xi, detuning);
  d.crosstalk_b = Eigen::MatrixXd::Zero(n_qubits, n_qubits);
  return d;
}

}  // namespace lmg
