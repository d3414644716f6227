#include "lmg/runner.hpp"

#include "lmg/parallel.hpp"
#include "lmg/spectrum.hpp"
#include "lmg/version.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lmg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTimeTol = 1e-9;
constexpr const char* kOutDirEnv = "LMG_OUT_DIR";

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// "150" -> "150", "37.5" -> "37p5"; used in per-time file names.
std::string time_tag(double t) {
  std::string s = format_number(t);
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

struct Problem {
  HilbertSpace space;
  DrivenHamiltonian hamiltonian;
  std::vector<CollapseOperator> lindblads;
  std::vector<std::string> warnings;
  std::optional<DeviceSpec> device;
  double lambda = 0.0;
};

Problem build_problem(const ExperimentConfig& c) {
  std::optional<DeviceSpec> dev;
  if (c.device) {
    dev = c.device->build(c.n_qubits);
  }
  const int sign = c.schedule.drive_sign;
  if (c.model == ModelKind::CircuitQed) {
    auto terms = circuit_qed_terms(*dev, c.n_max);
    const HilbertSpace space = terms.static_part.space();
    Problem p{space,
              quench_hamiltonian(terms.static_part, terms.drive_part * static_cast<double>(sign),
                                 c.schedule),
              {},
              {},
              dev,
              std::abs(mean_pair_coupling(*dev))};
    if (c.noise.any()) {
      auto set = lindblad_operators(*dev, c.noise, space);
      p.lindblads = std::move(set.ops);
      p.warnings = std::move(set.warnings);
    }
    return p;
  }
  const HilbertSpace space = c.model == ModelKind::EffectiveDicke
                                 ? HilbertSpace::dicke(c.n_qubits)
                                 : HilbertSpace::full_spin(c.n_qubits);
  const double lam = c.effective_lambda();
  const auto spin = collective_spin(space);
  Problem p{space,
            quench_hamiltonian(lmg_hamiltonian(space, 0.0, lam, sign),
                               spin.sx * static_cast<double>(sign), c.schedule),
            {},
            {},
            dev,
            lam};
  if (c.noise.any()) {
    auto set = lindblad_operators(*dev, c.noise, space);
    p.lindblads = std::move(set.ops);
    p.warnings = std::move(set.warnings);
  }
  return p;
}

std::vector<std::string> population_columns(int n) {
  std::vector<std::string> cols{"time_ns"};
  for (int k = 0; k <= n; ++k) {
    cols.push_back("P" + std::to_string(k));
  }
  return cols;
}

bool on_list(const std::vector<double>& list, double t) {
  for (double x : list) {
    if (std::abs(x - t) < kTimeTol) return true;
  }
  return false;
}

// Per-checkpoint observables, filled independently per slot.
struct CheckpointRows {
  std::vector<double> populations;
  std::vector<double> readout;
  std::vector<double> correlations;
  std::vector<double> ghz;
  std::vector<double> visibility;
  std::vector<std::vector<double>> fringe_curve;
  std::optional<WignerGrid> wigner;
};

double parity_expectation(const QuantumState& state) {
  const QuantumState q = reduce_to_qubits(state);
  return q.expectation(parity_operator(q.space())).real();
}

std::string now_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require_same_grid(const ExperimentConfig& a, const ExperimentConfig& b) {
  const auto& ta = a.integrator.checkpoint_times;
  const auto& tb = b.integrator.checkpoint_times;
  if (ta.size() != tb.size()) {
    throw std::invalid_argument("run_comparison: checkpoint grids differ in length");
  }
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (std::abs(ta[i] - tb[i]) > kTimeTol) {
      throw std::invalid_argument("run_comparison: checkpoint grids differ at index " +
                                  std::to_string(i));
    }
  }
  const auto& sa = a.schedule;
  const auto& sb = b.schedule;
  if (std::abs(sa.omega0 - sb.omega0) > 1e-12 || std::abs(sa.tf - sb.tf) > 1e-12 ||
      std::abs(sa.duration - sb.duration) > 1e-12 || sa.drive_sign != sb.drive_sign) {
    throw std::invalid_argument("run_comparison: schedules differ");
  }
  if (a.n_qubits != b.n_qubits) {
    throw std::invalid_argument("run_comparison: qubit counts differ");
  }
}

}  // namespace

std::size_t CsvTable::column(const std::string& column_name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column_name) return i;
  }
  throw std::out_of_range("CsvTable " + name + ": no column " + column_name);
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out += (i ? "," : "") + table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::logic_error("CsvTable " + table.name + ": row width mismatch");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot write " + path);
  }
  f << format_csv(table);
}

const CsvTable& SimulationResult::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no output table " + name);
}

SimulationResult simulate(const ExperimentConfig& config) {
  config.validate();
  Problem prob = build_problem(config);
  SimulationResult res;
  res.config = config;
  res.warnings = prob.warnings;

  const QuantumState psi0 = product_plus_state(prob.space);
  if (prob.lindblads.empty()) {
    res.trajectory = evolve_pure(prob.hamiltonian, psi0, config.integrator);
  } else {
    res.trajectory =
        evolve_lindblad(prob.hamiltonian, psi0.to_density(), prob.lindblads, config.integrator);
  }
  res.warnings.insert(res.warnings.end(), res.trajectory.warnings.begin(),
                      res.trajectory.warnings.end());

  const auto& obs = config.observables;
  const int n = config.n_qubits;
  const auto& cps = res.trajectory.checkpoints;
  const std::vector<double> betas = default_beta_grid(obs.fringes.beta_points);
  const std::vector<double> thetas = linspace_closed(0.0, std::numbers::pi, obs.wigner.n_theta);
  const std::vector<double> phis = linspace_open(0.0, 2.0 * std::numbers::pi, obs.wigner.n_phi);

  std::vector<CheckpointRows> slots(cps.size());
  parallel_for(cps.size(), [&](std::size_t i) {
    const double t = cps[i].time;
    const QuantumState& s = cps[i].state;
    CheckpointRows& r = slots[i];
    if (obs.populations) {
      r.populations.push_back(t);
      r.populations.push_back(units::to_mhz(quench_omega(t, config.schedule)));
      for (double p : excitation_populations(s)) r.populations.push_back(p);
    }
    if (obs.readout_error) {
      r.readout.push_back(t);
      const auto noisy = apply_readout_error(bitstring_distribution(s), *prob.device);
      for (double p : populations_from_distribution(noisy, n)) r.readout.push_back(p);
    }
    if (obs.correlations) {
      const Complex rho = coherence_element(s);
      r.correlations = {t, longitudinal_correlation(s), parity_expectation(s), std::abs(rho),
                        std::arg(rho)};
    }
    if (obs.ghz_fidelity) {
      const GhzFidelity f = ghz_fidelity(s);
      r.ghz = {t, f.overlap, f.population_form, f.gamma};
    }
    if (obs.fringes.enabled) {
      std::vector<double> values;
      values.reserve(betas.size());
      for (double b : betas) values.push_back(transverse_correlation(s, b));
      const FringeFit fit = fringe_fit(betas, values, n);
      r.visibility = {t, fit.amplitude, fit.phase, fit.offset, fit.residual_rms,
                      fit.coherence_magnitude};
      if (on_list(obs.fringes.times, t)) {
        for (std::size_t k = 0; k < betas.size(); ++k) {
          r.fringe_curve.push_back({t, betas[k], values[k]});
        }
      }
    }
    if (obs.wigner.enabled && on_list(obs.wigner.times, t)) {
      r.wigner = wigner(s, thetas, phis, obs.wigner.normalized);
    }
  });

  auto gather = [&](const std::string& name, std::vector<std::string> cols,
                    std::vector<double> CheckpointRows::*field) {
    CsvTable tbl{name, std::move(cols), {}};
    for (const auto& r : slots) tbl.rows.push_back(r.*field);
    res.tables.push_back(std::move(tbl));
  };
  if (obs.populations) {
    auto cols = population_columns(n);
    cols.insert(cols.begin() + 1, "omega_mhz_over_2pi");
    gather("populations.csv", cols, &CheckpointRows::populations);
  }
  if (obs.readout_error) {
    gather("populations_readout.csv", population_columns(n), &CheckpointRows::readout);
  }
  if (obs.correlations) {
    gather("correlations.csv", {"time_ns", "c2l", "parity_x", "coherence_abs", "coherence_arg"},
           &CheckpointRows::correlations);
  }
  if (obs.ghz_fidelity) {
    gather("ghz_fidelity.csv", {"time_ns", "overlap", "population_form", "gamma"},
           &CheckpointRows::ghz);
  }
  if (obs.fringes.enabled) {
    gather("visibility.csv",
           {"time_ns", "amplitude", "phase", "offset", "residual_rms", "coherence_abs"},
           &CheckpointRows::visibility);
    CsvTable curve{"fringes.csv", {"time_ns", "beta", "ctq"}, {}};
    for (const auto& r : slots) {
      curve.rows.insert(curve.rows.end(), r.fringe_curve.begin(), r.fringe_curve.end());
    }
    res.tables.push_back(std::move(curve));
  }
  if (obs.wigner.enabled) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!slots[i].wigner) continue;
      const WignerGrid& g = *slots[i].wigner;
      CsvTable tbl{"wigner_t" + time_tag(cps[i].time) + ".csv", {"theta", "phi", "value"}, {}};
      for (std::size_t a = 0; a < g.thetas.size(); ++a) {
        for (std::size_t b = 0; b < g.phis.size(); ++b) {
          tbl.rows.push_back({g.thetas[a], g.phis[b],
                              g.values(static_cast<Index>(a), static_cast<Index>(b))});
        }
      }
      res.tables.push_back(std::move(tbl));
    }
  }

  const ExtremalTarget target = config.schedule.drive_sign > 0 ? ExtremalTarget::HighestOfEffective
                                                               : ExtremalTarget::GroundOfLmg;
  if (obs.adiabaticity) {
    const DrivenHamiltonian& h = prob.hamiltonian;
    const auto points =
        adiabaticity_overlap(res.trajectory, [&h](double t) { return h.at(t); }, target);
    CsvTable tbl{"adiabaticity.csv", {"time_ns", "overlap", "eigenspace_dim"}, {}};
    for (const auto& p : points) {
      tbl.rows.push_back({p.time, p.overlap, static_cast<double>(p.eigenspace_dim)});
    }
    res.tables.push_back(std::move(tbl));
  }
  if (obs.spectrum.enabled) {
    const auto controls =
        linspace_closed(0.0, obs.spectrum.omega_over_lambda_max, obs.spectrum.points);
    std::vector<double> omegas;
    for (double x : controls) omegas.push_back(x * prob.lambda);
    const SpectrumScan scan = degeneracy_scan(n, prob.lambda, omegas, target);
    CsvTable levels{"spectrum.csv",
                    {"omega_over_lambda", "level", "energy_over_lambda", "parity"},
                    {}};
    CsvTable summary{"spectrum_summary.csv",
                     {"omega_over_lambda", "splitting_over_lambda", "gap_to_rest_over_lambda"},
                     {}};
    for (const auto& pt : scan.points) {
      for (Index k = 0; k < pt.eigenvalues.size(); ++k) {
        levels.rows.push_back({pt.control, static_cast<double>(k), pt.eigenvalues(k) / prob.lambda,
                               static_cast<double>(pt.parity[static_cast<std::size_t>(k)])});
      }
      summary.rows.push_back(
          {pt.control, pt.splitting / prob.lambda, pt.gap_to_rest / prob.lambda});
    }
    res.tables.push_back(std::move(levels));
    res.tables.push_back(std::move(summary));
  }
  if (obs.pair_swap.enabled) {
    const auto& ps = obs.pair_swap;
    std::vector<PairSwapResult> runs(ps.operating_points.size());
    parallel_for(runs.size(), [&](std::size_t i) {
      runs[i] = run_pair_swap(*prob.device, ps.qubit_a, ps.qubit_b, ps.operating_points[i],
                              ps.duration, ps.dt, ps.sample_spacing);
    });
    CsvTable osc{"pairswap_populations.csv",
                 {"omega_op_ghz_over_2pi", "time_ns", "p_first", "p_second"},
                 {}};
    CsvTable fits{"pairswap_fit.csv",
                  {"omega_op_ghz_over_2pi", "detuning_mhz_over_2pi", "xi_a_over_detuning",
                   "fitted_rate_mhz_over_2pi", "predicted_rate_mhz_over_2pi", "residual_rms"},
                  {}};
    const double xi_a = prob.device->xi[static_cast<std::size_t>(ps.qubit_a)];
    for (const auto& r : runs) {
      const double ghz = units::to_mhz(r.omega_op) * 1e-3;
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        osc.rows.push_back({ghz, r.times[k], r.population_a[k], r.population_b[k]});
      }
      fits.rows.push_back({ghz, units::to_mhz(r.detuning), xi_a / r.detuning,
                           units::to_mhz(r.fitted_rate), units::to_mhz(r.predicted_rate),
                           r.fit.residual_rms});
    }
    res.tables.push_back(std::move(osc));
    res.tables.push_back(std::move(fits));
    if (runs.size() >= 2) {
      const LineFit line = pair_swap_line(runs, *prob.device);
      res.tables.push_back(CsvTable{"pairswap_line.csv",
                                    {"slope_mhz_over_2pi", "intercept_mhz_over_2pi", "r_squared"},
                                    {{units::to_mhz(line.slope), units::to_mhz(line.intercept),
                                      line.r_squared}}});
    }
  }
  return res;
}

std::string resolve_output_dir(const std::string& requested, const std::string& config_dir) {
  if (!requested.empty()) return requested;
  if (!config_dir.empty()) return config_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "lmg-out";
}

std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("cannot read " + path);
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest init failed");
  }
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

std::string RunManifest::to_json() const {
  json j;
  j["config"] = json::parse(config_json);
  j["code_version"] = code_version;
  j["started_utc"] = started_utc;
  j["wall_seconds"] = wall_seconds;
  j["norm_drift"] = norm_drift;
  j["warnings"] = warnings;
  json files_json = json::array();
  for (const auto& f : files) {
    files_json.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  j["files"] = files_json;
  return j.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.started_utc = now_utc();
  m.code_version = kVersion;
  m.config_json = serialize_config(config);
  const SimulationResult res = simulate(config);
  const fs::path dir = resolve_output_dir(out_dir, config.output_dir);
  fs::create_directories(dir);
  for (const auto& t : res.tables) {
    const fs::path p = dir / t.name;
    write_csv(t, p.string());
    m.files.push_back({t.name, sha256_file(p.string()), fs::file_size(p)});
  }
  m.norm_drift = res.trajectory.norm_drift;
  m.warnings = res.warnings;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  f << m.to_json();
  return m;
}

CsvTable compare_results(const SimulationResult& first, const SimulationResult& second) {
  require_same_grid(first.config, second.config);
  const int n = first.config.n_qubits;
  CsvTable tbl{"comparison.csv",
               {"time_ns", "c2l_first", "c2l_second", "delta_c2l", "ghz_first", "ghz_second",
                "delta_ghz"},
               {}};
  for (int k = 0; k <= n; ++k) tbl.columns.push_back("delta_P" + std::to_string(k));
  const auto& a = first.trajectory.checkpoints;
  const auto& b = second.trajectory.checkpoints;
  tbl.rows.resize(a.size());
  parallel_for(a.size(), [&](std::size_t i) {
    const double ca = longitudinal_correlation(a[i].state);
    const double cb = longitudinal_correlation(b[i].state);
    const double fa = ghz_fidelity(a[i].state).overlap;
    const double fb = ghz_fidelity(b[i].state).overlap;
    std::vector<double> row{a[i].time, ca, cb, cb - ca, fa, fb, fb - fa};
    const auto pa = excitation_populations(a[i].state);
    const auto pb = excitation_populations(b[i].state);
    for (std::size_t k = 0; k < pa.size(); ++k) row.push_back(pb[k] - pa[k]);
    tbl.rows[i] = std::move(row);
  });
  return tbl;
}

CsvTable run_comparison(const ExperimentConfig& first, const ExperimentConfig& second,
                        const std::string& out_dir) {
  require_same_grid(first, second);
  CsvTable tbl = compare_results(simulate(first), simulate(second));
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_csv(tbl, (fs::path(out_dir) / tbl.name).string());
  }
  return tbl;
}

SwapFit fit_oscillation(std::span<const double> times, std::span<const double> values,
                        double w_lo, double w_hi) {
  if (times.size() != values.size() || times.size() < 4) {
    throw std::invalid_argument("fit_oscillation: need >= 4 matching samples");
  }
  if (!(w_lo > 0.0) || !(w_hi > w_lo)) {
    throw std::invalid_argument("fit_oscillation: invalid frequency window");
  }
  const auto m = static_cast<Index>(times.size());
  const Eigen::Map<const Eigen::VectorXd> y(values.data(), m);
  auto solve = [&](double w, SwapFit* out) {
    Eigen::MatrixXd a(m, 3);
    for (Index i = 0; i < m; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      a(i, 0) = std::cos(w * t);
      a(i, 1) = std::sin(w * t);
      a(i, 2) = 1.0;
    }
    const Eigen::Vector3d x = a.colPivHouseholderQr().solve(y);
    const double rms = std::sqrt((a * x - y).squaredNorm() / static_cast<double>(m));
    if (out != nullptr) {
      out->frequency = w;
      out->amplitude = std::hypot(x(0), x(1));
      out->offset = x(2);
      out->residual_rms = rms;
    }
    return rms;
  };
  // The scan step must resolve the residual dip, whose width is ~2 pi / T.
  const double span_t = times.back() - times.front();
  const double step = std::numbers::pi / (4.0 * span_t);
  double best_w = w_lo;
  double best = solve(w_lo, nullptr);
  for (double w = w_lo + step; w <= w_hi; w += step) {
    const double r = solve(w, nullptr);
    if (r < best) {
      best = r;
      best_w = w;
    }
  }
  double lo = std::max(w_lo, best_w - step);
  double hi = std::min(w_hi, best_w + step);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double fc = solve(c, nullptr);
  double fd = solve(d, nullptr);
  for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - phi * (hi - lo);
      fc = solve(c, nullptr);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + phi * (hi - lo);
      fd = solve(d, nullptr);
    }
  }
  SwapFit fit;
  solve(0.5 * (lo + hi), &fit);
  return fit;
}

PairSwapResult run_pair_swap(const DeviceSpec& device, int qubit_a, int qubit_b, double omega_op,
                             double duration, double dt, double sample_spacing) {
  if (qubit_a == qubit_b || qubit_a < 0 || qubit_b < 0 || qubit_a >= device.n_qubits ||
      qubit_b >= device.n_qubits) {
    throw std::invalid_argument("run_pair_swap: two distinct valid qubit indices required");
  }
  const auto a = static_cast<std::size_t>(qubit_a);
  const auto b = static_cast<std::size_t>(qubit_b);
  DeviceSpec pair;
  pair.n_qubits = 2;
  pair.xi = {device.xi[a], device.xi[b]};
  pair.t1 = {device.t1[a], device.t1[b]};
  pair.t2 = {device.t2[a], device.t2[b]};
  pair.f_g = {device.f_g[a], device.f_g[b]};
  pair.f_e = {device.f_e[a], device.f_e[b]};
  pair.omega_b = device.omega_b;
  pair.omega_o = omega_op;
  pair.omega_q = omega_op;
  pair.crosstalk_b = Eigen::MatrixXd::Zero(2, 2);
  pair.crosstalk_b(0, 1) = pair.crosstalk_b(1, 0) =
      device.crosstalk_b(static_cast<Index>(a), static_cast<Index>(b));
  try {
    pair.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("run_pair_swap: non-dispersive operating point: ") +
                                e.what());
  }

  // One excitation: n_max = 1 is exact.
  const int n_max = 1;
  const auto terms = circuit_qed_terms(pair, n_max);
  const HilbertSpace& space = terms.static_part.space();
  const auto idx = [&](std::uint64_t qubits, int photons) {
    return static_cast<Index>(qubits * static_cast<std::uint64_t>(n_max + 1) +
                              static_cast<std::uint64_t>(photons));
  };
  const Index eg = idx(0b10, 0);
  const Index ge = idx(0b01, 0);
  const auto rec = evolve_pure(DrivenHamiltonian(terms.static_part),
                               basis_state(space, 0b10),
                               IntegratorConfig{dt, uniform_checkpoints(duration, sample_spacing)});

  PairSwapResult r;
  r.qubit_a = qubit_a;
  r.qubit_b = qubit_b;
  r.omega_op = omega_op;
  r.detuning = omega_op - device.omega_b;
  r.predicted_rate = pair.xi[0] * pair.xi[1] / r.detuning + pair.crosstalk_b(0, 1);
  for (const auto& cp : rec.checkpoints) {
    r.times.push_back(cp.time);
    r.population_a.push_back(std::norm(cp.state.vector()(eg)));
    r.population_b.push_back(std::norm(cp.state.vector()(ge)));
  }
  const double w_lo = 2.0 * std::numbers::pi / duration;
  const double w_hi = std::min(0.5 * std::abs(r.detuning), std::numbers::pi / sample_spacing);
  r.fit = fit_oscillation(r.times, r.population_a, w_lo, w_hi);

  // Populations fix |g| only. With c_eg = cos(g t), c_ge = -i sin(g t), the sign
  // follows from Im(c_ge / c_eg) = -tan(g t), read where g t is near pi/4.
  const double t_quarter = std::numbers::pi / (2.0 * r.fit.frequency);
  std::size_t k = 0;
  for (std::size_t i = 0; i < rec.checkpoints.size(); ++i) {
    if (std::abs(rec.checkpoints[i].time - t_quarter) <
        std::abs(rec.checkpoints[k].time - t_quarter)) {
      k = i;
    }
  }
  const CVector& v = rec.checkpoints[k].state.vector();
  const double im = (v(ge) / v(eg)).imag();
  r.fitted_rate = (im > 0.0 ? -1.0 : 1.0) * 0.5 * r.fit.frequency;
  return r;
}

LineFit linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_regression: need >= 2 matching points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("linear_regression: x values are all equal");
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return f;
}

LineFit pair_swap_line(std::span<const PairSwapResult> results, const DeviceSpec& device) {
  std::vector<double> x, y;
  for (const auto& r : results) {
    x.push_back(device.xi[static_cast<std::size_t>(r.qubit_a)] / r.detuning);
    y.push_back(r.fitted_rate);
  }
  return linear_regression(x, y);
}

// ---------------------------------------------------------------- presets

namespace {

const std::vector<double> kFringeTimes6{0.0, 75.0, 105.0, 150.0};
const std::vector<double> kSnapshotTimes6{0.0, 50.0, 100.0, 150.0};
const std::vector<double> kSnapshotTimes10{0.0, 30.0, 60.0, 150.0};

// Snapshot times must be checkpoints; merge them into the grid.
ExperimentConfig with_snapshots_on_grid(ExperimentConfig c) {
  auto& grid = c.integrator.checkpoint_times;
  for (const auto* times : {&c.observables.fringes.times, &c.observables.wigner.times}) {
    grid.insert(grid.end(), times->begin(), times->end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-9; }),
             grid.end());
  return c;
}

ExperimentConfig error_model(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.model = ModelKind::CircuitQed;
  c.n_qubits = 6;
  c.device = DeviceChoice{};
  c.noise.enable_t1 = true;
  c.integrator.dt = kDefaultFullModelDt;
  return c;
}

ExperimentConfig ideal(const std::string& name, int n, double tf) {
  ExperimentConfig c;
  c.name = name;
  c.model = ModelKind::EffectiveDicke;
  c.n_qubits = n;
  c.schedule.tf = tf;
  c.lambda = units::mhz(3.8);
  c.integrator.dt = kDefaultEffectiveDt;
  return c;
}

struct PresetEntry {
  const char* name;
  const char* description;
  ExperimentConfig (*make)();
};

const std::vector<PresetEntry>& catalog() {
  static const std::vector<PresetEntry> entries{
      {"fig2", "populations P_n at 0/50/100/150 ns and P_0(t), six-qubit reference device with T1 and readout error",
       [] {
         auto c = error_model("fig2");
         c.observables.readout_error = true;
         c.observables.ghz_fidelity = false;
         return c;
       }},
      {"fig3", "transverse fringes at 0/75/105/150 ns, visibility(t) and C2L(t), six-qubit reference device with T1",
       [] {
         auto c = error_model("fig3");
         c.observables.fringes = {true, 25, kFringeTimes6};
         return c;
       }},
      {"fig4", "Wigner maps at 0/50/100/150 ns, six-qubit reference device with T1",
       [] {
         auto c = error_model("fig4");
         c.integrator.checkpoint_times = uniform_checkpoints(150.0, 50.0);
         c.observables.wigner = {true, kSnapshotTimes6, 61, 121, true};
         return c;
       }},
      {"s8", "error-model simulation: six-qubit reference device, resonator, T1 noise, every observable",
       [] {
         auto c = error_model("s8");
         c.observables.fringes = {true, 25, kFringeTimes6};
         c.observables.wigner = {true, kSnapshotTimes6, 61, 121, true};
         return c;
       }},
      {"s9", "ideal effective model, N = 6, uniform lambda = 3.8 MHz, every observable",
       [] {
         auto c = ideal("s9", 6, 60.0);
         c.observables.fringes = {true, 25, kFringeTimes6};
         c.observables.wigner = {true, kSnapshotTimes6, 61, 121, true};
         c.observables.adiabaticity = true;
         c.observables.spectrum.enabled = true;
         return c;
       }},
      {"s12", "ideal effective model, N = 10, t_f = 30 ns: populations, fringes, C2L",
       [] {
         auto c = ideal("s12", 10, 30.0);
         c.observables.fringes = {true, 41, kSnapshotTimes10};
         c.observables.adiabaticity = true;
         return c;
       }},
      {"s13", "ideal effective model, N = 10, t_f = 30 ns: Wigner maps at 0/30/60/150 ns",
       [] {
         auto c = ideal("s13", 10, 30.0);
         c.observables.populations = false;
         c.observables.correlations = false;
         c.observables.ghz_fidelity = false;
         c.observables.wigner = {true, kSnapshotTimes10, 61, 121, true};
         return c;
       }},
      {"pairswap", "Q2-Q5 exchange at 5.6895/5.66/5.60 GHz and the rate-vs-xi2/detuning line",
       [] {
         ExperimentConfig c;
         c.name = "pairswap";
         c.model = ModelKind::CircuitQed;
         c.n_qubits = 6;
         c.device = DeviceChoice{};
         c.integrator = {kDefaultFullModelDt, {0.0}};
         c.observables.populations = false;
         c.observables.correlations = false;
         c.observables.ghz_fidelity = false;
         c.observables.pair_swap.enabled = true;
         c.observables.pair_swap.operating_points = {units::ghz(5.6895), units::ghz(5.66),
                                                     units::ghz(5.60)};
         return c;
       }},
  };
  return entries;
}

const PresetEntry& find_preset(const std::string& name) {
  for (const auto& e : catalog()) {
    if (name == e.name) return e;
  }
  std::string known;
  for (const auto& e : catalog()) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& e : catalog()) out.push_back(e.name);
  return out;
}

ExperimentConfig preset(const std::string& name) {
  return with_snapshots_on_grid(find_preset(name).make());
}

std::string preset_description(const std::string& name) {
  return find_preset(name).description;
}

}  // namespace lmg
