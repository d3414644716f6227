#include "lmg/config.hpp"
#include "lmg/parallel.hpp"
#include "lmg/runner.hpp"
#include "lmg/spectrum.hpp"
#include "lmg/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;

struct Globals {
  std::string out_dir;
  std::size_t threads = 0;
  std::optional<double> dt_override;
};

struct Source {
  std::string preset;
  std::string config_path;
};

lmg::ExperimentConfig load(const Source& src, const Globals& g) {
  if (src.preset.empty() == src.config_path.empty()) {
    throw lmg::ConfigError("<cli>", "give exactly one of --preset or --config");
  }
  lmg::ExperimentConfig c =
      src.preset.empty() ? lmg::load_config(src.config_path) : lmg::preset(src.preset);
  if (g.dt_override) {
    c.integrator.dt = *g.dt_override;
  }
  c.validate();
  return c;
}

void print_manifest(const lmg::RunManifest& m, const std::string& dir) {
  json out;
  out["status"] = "ok";
  out["out_dir"] = dir;
  out["wall_seconds"] = m.wall_seconds;
  out["norm_drift"] = m.norm_drift;
  out["warnings"] = m.warnings;
  std::vector<std::string> names;
  for (const auto& f : m.files) names.push_back(f.name);
  out["files"] = names;
  std::cout << out.dump(2) << "\n";
}

int report_error(const std::exception& e) {
  json err;
  err["status"] = "error";
  err["message"] = e.what();
  int code = 1;
  if (const auto* ce = dynamic_cast<const lmg::ConfigError*>(&e)) {
    err["type"] = "config";
    err["field"] = ce->field();
    code = 2;
  } else if (dynamic_cast<const lmg::IntegrationDiverged*>(&e) != nullptr) {
    err["type"] = "integration_diverged";
  } else if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) {
    err["type"] = "invalid_argument";
    code = 2;
  } else {
    err["type"] = "runtime";
  }
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench simulator for the driven all-to-all spin model"};
  app.set_version_flag("--version", std::string(lmg::kVersion));
  app.require_subcommand(1);

  Globals g;
  double dt = 0.0;
  app.add_option("--out-dir", g.out_dir, "Output directory (default: $LMG_OUT_DIR or ./lmg-out)");
  app.add_option("--threads", g.threads, "Worker threads (default: all cores)");
  auto* dt_opt = app.add_option("--dt-override", dt, "Replace the integrator step (ns)")
                     ->check(CLI::PositiveNumber);

  Source sim_src;
  bool dump = false;
  auto* sim = app.add_subcommand("simulate", "Run a preset or a config file");
  sim->add_option("--preset", sim_src.preset, "Preset name (see `presets`)");
  sim->add_option("--config", sim_src.config_path, "JSON config file")->check(CLI::ExistingFile);
  sim->add_flag("--dump-config", dump, "Print the resolved config and exit");

  Source cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "Per-checkpoint deltas between two runs");
  cmp->add_option("--first-preset", cmp_a.preset);
  cmp->add_option("--first-config", cmp_a.config_path)->check(CLI::ExistingFile);
  cmp->add_option("--second-preset", cmp_b.preset);
  cmp->add_option("--second-config", cmp_b.config_path)->check(CLI::ExistingFile);

  int spec_n = 6;
  double spec_lambda = 3.8;
  double spec_max = 3.0;
  int spec_points = 61;
  bool spec_ground = false;
  double shifts_ratio = 0.0;
  auto* spec = app.add_subcommand("spectrum", "Dicke spectrum versus Omega/lambda");
  spec->add_option("-n,--qubits", spec_n)->check(CLI::Range(1, 64));
  spec->add_option("--lambda-mhz", spec_lambda, "lambda / 2pi in MHz");
  spec->add_option("--max-ratio", spec_max, "Largest Omega / lambda")->check(CLI::PositiveNumber);
  spec->add_option("--points", spec_points)->check(CLI::PositiveNumber);
  spec->add_flag("--ground", spec_ground, "Track the ground state of -(Omega Sx + lambda Sz^2)");
  spec->add_option("--shifts", shifts_ratio,
                   "Also compare second-order shifts at this Omega / lambda");

  Source wig_src{"s9", ""};
  std::vector<double> wig_times{0.0, 50.0, 100.0, 150.0};
  int n_theta = 61, n_phi = 121;
  bool raw = false;
  auto* wig = app.add_subcommand("wigner", "Wigner maps of a run at chosen times");
  wig->add_option("--preset", wig_src.preset);
  wig->add_option("--config", wig_src.config_path)->check(CLI::ExistingFile);
  wig->add_option("--times", wig_times, "Checkpoint times (ns)");
  wig->add_option("--n-theta", n_theta)->check(CLI::PositiveNumber);
  wig->add_option("--n-phi", n_phi)->check(CLI::PositiveNumber);
  wig->add_flag("--raw", raw, "Unnormalized kernel (1 - sqrt(3) sigma_z per qubit)");

  std::vector<int> pair{2, 5};
  std::vector<double> op_ghz{5.6895, 5.66, 5.60};
  double swap_duration = 1000.0;
  auto* swp = app.add_subcommand("pairswap", "Two-qubit exchange through the resonator");
  swp->add_option("--pair", pair, "Qubit labels, 1-based (Q2 Q5 -> 2 5)")->expected(2);
  swp->add_option("--op-ghz", op_ghz, "Operating points / 2pi in GHz");
  swp->add_option("--duration", swap_duration, "Simulated time (ns)")->check(CLI::PositiveNumber);

  auto* pre = app.add_subcommand("presets", "List the preset catalog");

  CLI11_PARSE(app, argc, argv);
  if (*dt_opt) {
    g.dt_override = dt;
  }

  try {
    lmg::set_default_threads(g.threads);
    if (*pre) {
      for (const auto& name : lmg::preset_names()) {
        std::cout << name << "\t" << lmg::preset_description(name) << "\n";
      }
      return 0;
    }
    if (*sim) {
      const lmg::ExperimentConfig c = load(sim_src, g);
      if (dump) {
        std::cout << lmg::serialize_config(c);
        return 0;
      }
      const std::string dir = lmg::resolve_output_dir(g.out_dir, c.output_dir);
      print_manifest(lmg::run(c, dir), dir);
      return 0;
    }
    if (*cmp) {
      const auto a = load(cmp_a, g);
      const auto b = load(cmp_b, g);
      const std::string dir = lmg::resolve_output_dir(g.out_dir, "");
      const auto tbl = lmg::run_comparison(a, b, dir);
      json out{{"status", "ok"}, {"out_dir", dir}, {"file", tbl.name}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*spec) {
      lmg::ExperimentConfig c;
      c.name = "spectrum";
      c.n_qubits = spec_n;
      c.lambda = lmg::units::mhz(spec_lambda);
      c.schedule.drive_sign = spec_ground ? -1 : 1;
      c.integrator.checkpoint_times = {0.0};
      c.observables = {};
      c.observables.populations = false;
      c.observables.correlations = false;
      c.observables.ghz_fidelity = false;
      c.observables.spectrum = {true, spec_max, spec_points};
      if (g.dt_override) c.integrator.dt = *g.dt_override;
      const std::string dir = lmg::resolve_output_dir(g.out_dir, "");
      const auto m = lmg::run(c, dir);
      if (shifts_ratio > 0.0) {
        lmg::CsvTable t{"shifts.csv", {"m", "exact_over_lambda", "predicted_over_lambda",
                                       "relative_error"}, {}};
        const double lam = lmg::units::mhz(spec_lambda);
        for (const auto& s : lmg::compare_perturbative_shifts(spec_n, shifts_ratio * lam, lam,
                                                             spec_ground ? -1 : 1)) {
          t.rows.push_back({s.m, s.exact / lam, s.predicted / lam, s.relative_error});
        }
        lmg::write_csv(t, (std::filesystem::path(dir) / t.name).string());
      }
      print_manifest(m, dir);
      return 0;
    }
    if (*wig) {
      lmg::ExperimentConfig c = load(wig_src, g);
      c.observables.wigner = {true, wig_times, n_theta, n_phi, !raw};
      const std::string dir = lmg::resolve_output_dir(g.out_dir, c.output_dir);
      print_manifest(lmg::run(c, dir), dir);
      return 0;
    }
    if (*swp) {
      lmg::ExperimentConfig c = lmg::preset("pairswap");
      c.observables.pair_swap.qubit_a = pair.at(0) - 1;
      c.observables.pair_swap.qubit_b = pair.at(1) - 1;
      c.observables.pair_swap.operating_points.clear();
      for (double f : op_ghz) c.observables.pair_swap.operating_points.push_back(lmg::units::ghz(f));
      c.observables.pair_swap.duration = swap_duration;
      if (g.dt_override) c.observables.pair_swap.dt = *g.dt_override;
      const std::string dir = lmg::resolve_output_dir(g.out_dir, "");
      print_manifest(lmg::run(c, dir), dir);
      return 0;
    }
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return 0;
}
