#include "lmg/config.hpp"
#include "lmg/parallel.hpp"
#include "lmg/runner.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace {

using namespace lmg;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("lmg-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_dicke(int n = 4) {
  ExperimentConfig c;
  c.name = "small";
  c.n_qubits = n;
  c.integrator = {0.05, uniform_checkpoints(150.0, 25.0)};
  return c;
}

// ---- parallel_for

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, 8);
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsLowestFailure) {
  try {
    parallel_for(
        64,
        [](std::size_t i) {
          if (i == 5 || i == 40) throw std::runtime_error("fail " + std::to_string(i));
        },
        1);
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "fail 5");
  }
}

TEST(ParallelFor, DefaultThreadsSetting) {
  const auto before = default_threads();
  set_default_threads(3);
  EXPECT_EQ(default_threads(), 3u);
  set_default_threads(0);
  EXPECT_GE(default_threads(), 1u);
  set_default_threads(before);
}

// ---- CSV

TEST(Csv, FormatAndLookup) {
  CsvTable t{"x.csv", {"a", "b"}, {{1.0, 0.1}, {2.5, 1e-20}}};
  EXPECT_EQ(format_csv(t), "a,b\n1,0.1\n2.5,1e-20\n");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("c"), std::out_of_range);
  t.rows.push_back({1.0});
  EXPECT_THROW(format_csv(t), std::logic_error);
}

TEST(Sha256, KnownDigest) {
  const auto dir = scratch_dir("sha");
  fs::create_directories(dir);
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(sha256_file((dir / "abc.txt").string()),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(sha256_file((dir / "missing").string()), std::runtime_error);
  fs::remove_all(dir);
}

// ---- config

TEST(Config, RoundTripEveryPreset) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    EXPECT_NO_THROW(c.validate()) << name;
    EXPECT_FALSE(preset_description(name).empty());
    const std::string text = serialize_config(c);
    const auto back = parse_config(text);
    EXPECT_EQ(serialize_config(back), text) << name;
  }
  EXPECT_THROW(preset("nope"), std::invalid_argument);
}

TEST(Config, UnitsAtTheBoundary) {
  const auto j = json::parse(serialize_config(preset("s9")));
  EXPECT_NEAR(j["schedule"]["omega0_mhz_over_2pi"].get<double>(), 40.0, 1e-12);
  EXPECT_NEAR(j["lambda_mhz_over_2pi"].get<double>(), 3.8, 1e-12);
  const auto c = parse_config(j.dump());
  EXPECT_NEAR(c.schedule.omega0, units::mhz(40.0), 1e-15);
}

TEST(Config, RejectsUnknownFieldWithPath) {
  auto j = json::parse(serialize_config(preset("s9")));
  j["schedule"]["tf"] = 3.0;
  try {
    parse_config(j.dump());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "schedule.tf");
  }
}

TEST(Config, RejectsMalformedJson) {
  EXPECT_THROW(parse_config("{ not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/path.json"), ConfigError);
}

TEST(Config, ModelNoiseCompatibility) {
  auto c = small_dicke(6);
  c.noise.enable_t1 = true;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "noise");
  }
  c = small_dicke(6);
  c.device = DeviceChoice{};
  EXPECT_THROW(c.validate(), ConfigError);  // inhomogeneous couplings
  c = small_dicke(6);
  c.model = ModelKind::CircuitQed;
  EXPECT_THROW(c.validate(), ConfigError);  // needs a device
}

TEST(Config, CheckpointAndObservableChecks) {
  auto c = small_dicke();
  c.integrator.checkpoint_times = {0.0, 200.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_dicke();
  c.observables.fringes = {true, 25, {30.0}};
  EXPECT_THROW(c.validate(), ConfigError);  // 30 not on the 25 ns grid
  c.observables.fringes = {true, 2, {25.0}};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_dicke();
  c.observables.adiabaticity = true;
  EXPECT_NO_THROW(c.validate());
  c.model = ModelKind::CircuitQed;
  c.device = DeviceChoice{"homogeneous"};
  c.device->xi = units::mhz(20.0);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ModelNames) {
  for (auto k : {ModelKind::EffectiveDicke, ModelKind::EffectiveFull, ModelKind::CircuitQed}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_model_kind("lindblad"), ConfigError);
}

TEST(Config, EffectiveLambdaFromDevice) {
  auto c = small_dicke(6);
  c.device = DeviceChoice{"homogeneous"};
  EXPECT_NEAR(c.effective_lambda(), effective_coupling(units::mhz(20.0), units::mhz(-106.5)), 1e-15);
}

// ---- simulate / run

TEST(Simulate, TablesAndInitialValues) {
  auto c = small_dicke(6);
  c.observables.fringes = {true, 25, {0.0, 150.0}};
  const auto r = simulate(c);
  const auto& pops = r.table("populations.csv");
  EXPECT_EQ(pops.rows.size(), c.integrator.checkpoint_times.size());
  EXPECT_NEAR(pops.rows[0][pops.column("P0")], 1.0 / 64.0, 1e-14);
  EXPECT_NEAR(pops.rows[0][pops.column("omega_mhz_over_2pi")], 40.0, 1e-12);
  const auto& corr = r.table("correlations.csv");
  EXPECT_NEAR(corr.rows[0][corr.column("c2l")], 0.0, 1e-14);
  EXPECT_NEAR(corr.rows[0][corr.column("parity_x")], 1.0, 1e-12);
  EXPECT_EQ(r.table("fringes.csv").rows.size(), 50u);
  EXPECT_THROW(r.table("wigner_t0.csv"), std::out_of_range);
}

TEST(Simulate, ParityConservedAlongQuench) {
  const auto r = simulate(small_dicke(6));
  const auto& corr = r.table("correlations.csv");
  for (const auto& row : corr.rows) EXPECT_NEAR(row[corr.column("parity_x")], 1.0, 1e-6);
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
  auto c = small_dicke(5);
  c.model = ModelKind::EffectiveFull;
  c.observables.fringes = {true, 11, {150.0}};
  set_default_threads(1);
  const auto a = simulate(c);
  set_default_threads(4);
  const auto b = simulate(c);
  set_default_threads(0);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  for (std::size_t k = 0; k < a.tables.size(); ++k) {
    EXPECT_EQ(format_csv(a.tables[k]), format_csv(b.tables[k])) << a.tables[k].name;
  }
}

TEST(Run, WritesFilesWithChecksums) {
  const auto dir = scratch_dir("run");
  auto c = small_dicke(4);
  c.observables.wigner = {true, {150.0}, 5, 8, true};
  const auto m = run(c, dir.string());
  std::set<std::string> names;
  for (const auto& f : m.files) {
    names.insert(f.name);
    EXPECT_EQ(f.sha256, sha256_file((dir / f.name).string()));
    EXPECT_EQ(f.bytes, fs::file_size(dir / f.name));
  }
  EXPECT_TRUE(names.count("populations.csv"));
  EXPECT_TRUE(names.count("wigner_t150.csv"));
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), m.files.size());
  EXPECT_EQ(manifest["config"]["n_qubits"].get<int>(), 4);
  // Byte-identical CSVs on a rerun.
  const auto again = run(c, dir.string());
  for (std::size_t k = 0; k < m.files.size(); ++k) EXPECT_EQ(m.files[k].sha256, again.files[k].sha256);
  fs::remove_all(dir);
}

TEST(Run, OutputDirPrecedence) {
  ::setenv("LMG_OUT_DIR", "/tmp/from-env", 1);
  EXPECT_EQ(resolve_output_dir("a", "b"), "a");
  EXPECT_EQ(resolve_output_dir("", "b"), "b");
  EXPECT_EQ(resolve_output_dir("", ""), "/tmp/from-env");
  ::unsetenv("LMG_OUT_DIR");
  EXPECT_EQ(resolve_output_dir("", ""), "lmg-out");
}

TEST(Compare, IdenticalConfigsGiveZeroDeltas) {
  const auto c = small_dicke(4);
  const auto t = run_comparison(c, c);
  for (const auto& row : t.rows) {
    for (std::size_t k = t.column("delta_c2l"); k < row.size(); ++k) {
      if (t.columns[k].rfind("delta", 0) == 0) EXPECT_EQ(row[k], 0.0);
    }
  }
}

TEST(Compare, FullSpinMatchesDicke) {
  auto a = small_dicke(4);
  auto b = a;
  b.model = ModelKind::EffectiveFull;
  const auto t = run_comparison(a, b);
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (t.columns[k].rfind("delta", 0) == 0) EXPECT_LT(std::abs(row[k]), 1e-8);
    }
  }
}

TEST(Compare, MismatchedGridsRejected) {
  auto a = small_dicke(4);
  auto b = a;
  b.integrator.checkpoint_times = uniform_checkpoints(150.0, 50.0);
  EXPECT_THROW(run_comparison(a, b), std::invalid_argument);
  b = a;
  b.schedule.tf = 30.0;
  EXPECT_THROW(run_comparison(a, b), std::invalid_argument);
}

// ---- oscillation fit and pair swap

TEST(FitOscillation, RecoversSyntheticSignal) {
  std::vector<double> t, v;
  for (int k = 0; k <= 600; ++k) {
    t.push_back(k);
    v.push_back(0.5 + 0.45 * std::cos(0.047 * k + 0.2));
  }
  const auto f = fit_oscillation(t, v, 2.0 * std::numbers::pi / 600.0, 1.0);
  EXPECT_NEAR(f.frequency, 0.047, 1e-7);
  EXPECT_NEAR(f.amplitude, 0.45, 1e-6);
  EXPECT_NEAR(f.offset, 0.5, 1e-6);
  EXPECT_THROW(fit_oscillation(std::span<const double>(t).first(3), std::span<const double>(v).first(3), 0.1, 1.0),
               std::invalid_argument);
}

TEST(LinearRegression, ExactLine) {
  const std::vector<double> x{0.1, 0.2, 0.4}, y{1.3, 1.6, 2.2};
  const auto f = linear_regression(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  const std::vector<double> flat{1.0, 1.0};
  EXPECT_THROW(linear_regression(flat, flat), std::invalid_argument);
}

// Exact single-excitation oracle: eigenvalues of
// [[0, b, xa], [b, 0, xb], [xa, xb, omega_b - omega_op]]; the swap rate is
// half the splitting of the two qubit-like levels.
double three_level_rate(double xa, double xb, double b, double db) {
  Eigen::Matrix3d h;
  h << 0.0, b, xa, b, 0.0, xb, xa, xb, db;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h);
  std::vector<double> ev{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
  std::sort(ev.begin(), ev.end(), [](double p, double q) { return std::abs(p) < std::abs(q); });
  return 0.5 * std::abs(ev[0] - ev[1]);
}

TEST(PairSwap, EqualCouplingNoCrosstalk) {
  const double xi = units::mhz(20.0);
  for (double det_mhz : {-106.5, -400.0}) {
    const auto dev = homogeneous_device(2, xi, units::mhz(det_mhz));
    const double det = units::mhz(det_mhz);
    const auto r = run_pair_swap(dev, 0, 1, dev.omega_b + det, 2000.0, 0.01, 1.0);
    EXPECT_NEAR(r.predicted_rate, xi * xi / det, 1e-15);
    EXPECT_LT(r.fitted_rate, 0.0);
    EXPECT_NEAR(std::abs(r.fitted_rate), three_level_rate(xi, xi, 0.0, -det), 1e-3 * std::abs(r.fitted_rate));
    if (det_mhz == -400.0) {
      // Far detuned: the second-order rate xi^2 / detuning.
      EXPECT_NEAR(r.fitted_rate, xi * xi / det, 0.02 * std::abs(xi * xi / det));
    }
    EXPECT_NEAR(r.population_a.front(), 1.0, 1e-15);
  }
}

TEST(PairSwap, DeviceQubitsMatchThreeLevelOracle) {
  const auto dev = paper_device_preset();
  const double op = units::ghz(5.6895);
  const auto r = run_pair_swap(dev, 1, 4, op);
  const double exact = three_level_rate(dev.xi[1], dev.xi[4], dev.crosstalk_b(1, 4), dev.omega_b - op);
  EXPECT_NEAR(std::abs(r.fitted_rate), exact, 1e-3 * exact);
  EXPECT_LT(r.fitted_rate, 0.0);
  EXPECT_NEAR(units::to_mhz(r.predicted_rate), -3.96, 0.01);
}

TEST(PairSwap, Errors) {
  const auto dev = paper_device_preset();
  EXPECT_THROW(run_pair_swap(dev, 1, 1, units::ghz(5.6895)), std::invalid_argument);
  EXPECT_THROW(run_pair_swap(dev, 1, 7, units::ghz(5.6895)), std::invalid_argument);
  EXPECT_THROW(run_pair_swap(dev, 1, 4, dev.omega_b - units::mhz(50.0)), std::invalid_argument);
}

// ---- command-line tool

#ifdef LMGSIM_PATH
struct CliResult {
  int code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(LMGSIM_PATH) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p) != nullptr) out += buf;
  const int status = ::pclose(p);
  return {WEXITSTATUS(status), out};
}

TEST(Cli, PresetsAndVersion) {
  const auto r = run_cli("presets");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("s9"), std::string::npos);
  EXPECT_EQ(run_cli("--version").code, 0);
}

TEST(Cli, ConfigErrorsAreMachineReadable) {
  const auto dir = scratch_dir("cli");
  fs::create_directories(dir);
  auto j = json::parse(serialize_config(small_dicke()));
  j["n_qubits"] = 0;
  std::ofstream(dir / "bad.json") << j.dump();
  const auto r = run_cli("simulate --config " + (dir / "bad.json").string());
  EXPECT_EQ(r.code, 2);
  const auto err = json::parse(r.output);
  EXPECT_EQ(err["status"], "error");
  EXPECT_EQ(err["type"], "config");
  EXPECT_EQ(err["field"], "n_qubits");
  fs::remove_all(dir);
}

TEST(Cli, SimulateFromConfigWritesManifest) {
  const auto dir = scratch_dir("cli-ok");
  fs::create_directories(dir);
  std::ofstream(dir / "ok.json") << serialize_config(small_dicke());
  const auto r = run_cli("--out-dir " + (dir / "out").string() + " simulate --config " +
                         (dir / "ok.json").string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_NE(run_cli("simulate --preset nope").code, 0);
  fs::remove_all(dir);
}
#endif

}  // namespace
