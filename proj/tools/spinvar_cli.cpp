// spinvar command-line harness.
//
// Subcommands mirror the study pipeline: generate-config writes an annotated
// experiment config, optimize runs the (n, m, seed) grid, analyze
// re-simulates a stored record and emits characterization data, ramsey
// produces sensing-performance curves under stretched-exponential dephasing,
// controllability reports dynamical-Lie-algebra dimensions, and oracle prints
// the closed-form single-qubit Ramsey values.
//
// Units in all interfaces: lengths nm, frequencies Hz, times s, angles rad.
// Exit codes: 0 success, 1 config error, 2 partial instance failure,
// 3 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "spinvar/experiment.hpp"

namespace fs = std::filesystem;
using spinvar::json;

namespace {

json default_config_json() {
  spinvar::ExperimentConfig cfg;
  cfg.n_values = {2, 3, 4};
  cfg.m_values = {1};
  cfg.seed_count = 3;
  json j = cfg.to_json();
  j["_comment"] = "lengths nm, frequencies Hz, times s, angles rad; n/m accept an int or [lo, hi]";
  return j;
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
  return v;
}

spinvar::QuantumState ramsey_probe_by_name(const std::string& name, int n) {
  if (name == "css") return spinvar::initial_state(n, 1.0);
  // plain "ghz" means the natural Heisenberg-limit probe
  const std::string kind = (name == "ghz") ? "ghz-x" : name;
  return spinvar::reference_state(spinvar::reference_kind_from_name(kind), n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational metrological state preparation in dipolar spin ensembles"};
  app.require_subcommand(1);

  std::string config_file, out_dir = "out", record_file;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  bool resume = false;

  // generate-config
  auto* gen = app.add_subcommand("generate-config", "write an annotated default experiment config");
  std::string gen_out = "config.json";
  gen->add_option("--out", gen_out, "output file (default config.json)");

  // optimize
  auto* opt = app.add_subcommand("optimize", "run the (n, m, seed) optimization grid");
  opt->add_option("--config", config_file, "experiment config file")->required();
  opt->add_option("--out", out_dir, "output directory (overrides config)");
  opt->add_option("--seed", seed, "master seed (overrides config)")->each([&](const std::string&) {
    seed_given = true;
  });
  opt->add_option("--workers", workers, "worker count (overrides config)");
  opt->add_flag("--resume", resume, "skip instances already recorded for this config");

  // analyze
  auto* ana = app.add_subcommand("analyze", "re-simulate a record and emit analysis data");
  std::vector<std::string> analyses{"wigner", "entropy", "clusters", "squeezing", "cutoff"};
  ana->add_option("--record", record_file, "instance record JSON")->required();
  ana->add_option("--out", out_dir, "output directory");
  ana->add_option("--analyses", analyses,
                  "subset of {wigner, entropy, clusters, squeezing, cutoff}");
  double cluster_threshold = 0.4;
  ana->add_option("--cluster-threshold", cluster_threshold, "entropy threshold in bits (default 0.4)");

  // ramsey
  auto* ram = app.add_subcommand("ramsey", "sensing performance under stretched-exponential dephasing");
  std::string ram_state = "css";
  int ram_n = 2;
  double ram_t2 = 1.0, ram_nu = 1.0, ram_toh = 0.0;
  double ram_tmin = 0.05, ram_tmax = 3.0;
  int ram_tcount = 40;
  std::string ram_preset;
  ram->add_option("--record", record_file, "use the re-simulated state of this record as probe");
  ram->add_option("--state", ram_state, "reference probe: css, ghz, ghz-x, ghz-z, dicke");
  ram->add_option("--n", ram_n, "spin count for reference probes");
  ram->add_option("--t2", ram_t2, "coherence time T2 in seconds");
  ram->add_option("--nu", ram_nu, "stretch factor (>= 1)");
  ram->add_option("--t-oh", ram_toh, "time overhead in seconds");
  ram->add_option("--t-min", ram_tmin, "grid start in units of T2");
  ram->add_option("--t-max", ram_tmax, "grid end in units of T2");
  ram->add_option("--t-count", ram_tcount, "grid size");
  ram->add_option("--preset", ram_preset,
                  "platform preset for T2/nu: nv-ensemble, p1-centers, rare-earth, cold-molecules");
  ram->add_option("--out", out_dir, "output directory");

  // controllability
  auto* ctrl = app.add_subcommand("controllability", "dynamical Lie algebra dimensions");
  int ctrl_n = 2;
  std::string ctrl_model = "dipolar-spin-half";
  ctrl->add_option("--n", ctrl_n, "spin count (<= 5)")->required();
  ctrl->add_option("--model", ctrl_model,
                   "dipolar-spin-half, nv-effective, ising, symmetric-ising, single-qubit");
  ctrl->add_option("--out", out_dir, "output directory");

  // oracle
  auto* orc = app.add_subcommand("oracle", "closed-form single-qubit Ramsey values");
  double orc_omega = 1.0, orc_gmin = 0.0, orc_gmax = 0.5, orc_tmin = 0.1, orc_tmax = 2.0;
  int orc_count = 5;
  orc->add_option("--omega", orc_omega, "signal frequency rad/s");
  orc->add_option("--gamma-min", orc_gmin, "dephasing rate grid start 1/s");
  orc->add_option("--gamma-max", orc_gmax, "dephasing rate grid end 1/s");
  orc->add_option("--t-min", orc_tmin, "time grid start s");
  orc->add_option("--t-max", orc_tmax, "time grid end s");
  orc->add_option("--count", orc_count, "grid points per axis");
  orc->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      std::ofstream f(gen_out);
      f << default_config_json().dump(2) << "\n";
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (*opt) {
      spinvar::ExperimentConfig cfg;
      try {
        cfg = spinvar::load_experiment_config(config_file);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
      if (opt->count("--out")) cfg.out_dir = out_dir;
      if (seed_given) cfg.master_seed = seed;
      if (workers > 0) cfg.workers = workers;
      const spinvar::OptimizeOutcome outcome = spinvar::cmd_optimize(cfg, resume);
      std::cout << "completed " << outcome.completed << ", resumed " << outcome.skipped
                << ", failed " << outcome.failed << "\n"
                << "aggregate: " << outcome.aggregate_csv.string() << "\n"
                << "summary:   " << outcome.summary_csv.string() << "\n";
      return outcome.failed == 0 ? 0 : 2;
    }

    if (*ana) {
      const spinvar::RecordState rec = spinvar::resimulate_record(record_file);
      fs::create_directories(out_dir);
      for (const std::string& a : analyses) {
        if (a == "wigner") {
          spinvar::write_wigner_csv(spinvar::wigner_distribution(rec.state),
                                    fs::path(out_dir) / "wigner.csv");
        } else if (a == "entropy") {
          json per_spin = json::array();
          for (int i = 0; i < rec.spins.n_spins(); ++i)
            per_spin.push_back(spinvar::von_neumann_entropy(rec.state, {i}));
          std::ofstream f(fs::path(out_dir) / "entropy.json");
          f << json{{"single_spin_entropies_bits", per_spin}}.dump(2) << "\n";
        } else if (a == "clusters") {
          std::ofstream f(fs::path(out_dir) / "clusters.json");
          f << spinvar::cluster_to_json(spinvar::cluster_partition(rec.state, cluster_threshold))
                   .dump(2)
            << "\n";
        } else if (a == "squeezing") {
          json j;
          try {
            j["xi2"] = spinvar::squeezing_parameter(rec.state);
          } catch (const std::exception& e) {
            j["xi2"] = nullptr;
            j["note"] = e.what();
          }
          std::ofstream f(fs::path(out_dir) / "squeezing.json");
          f << j.dump(2) << "\n";
        } else if (a == "cutoff") {
          std::ofstream f(fs::path(out_dir) / "cutoff.csv");
          f << "f_cutoff_hz,fidelity\n";
          for (double frac : {0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0}) {
            const double fc = frac * rec.f_dd_hz;
            f << spinvar::format_double(fc) << ','
              << spinvar::format_double(spinvar::cutoff_fidelity(rec.spins, rec.params, fc))
              << "\n";
          }
        } else {
          std::cerr << "unknown analysis '" << a << "'\n";
          return 1;
        }
      }
      std::cout << "analysis written to " << out_dir << "\n";
      return 0;
    }

    if (*ram) {
      if (!ram_preset.empty()) {
        bool found = false;
        for (const auto& p : spinvar::constants::platform_presets)
          if (ram_preset == p.name) {
            ram_t2 = p.t2_dd_s;
            ram_nu = std::max(1.0, p.nu_min);
            found = true;
          }
        if (!found) {
          std::cerr << "unknown preset '" << ram_preset << "'\n";
          return 1;
        }
      }
      spinvar::QuantumState probe = [&] {
        if (ram->count("--record")) {
          const spinvar::RecordState rec = spinvar::resimulate_record(record_file);
          return rec.state;
        }
        return ramsey_probe_by_name(ram_state, ram_n);
      }();
      const std::vector<double> grid = linspace(ram_tmin * ram_t2, ram_tmax * ram_t2, ram_tcount);
      const std::string tag = ram->count("--record") ? "record" : ram_state;
      const auto files = spinvar::cmd_ramsey(probe, ram_t2, ram_nu, ram_toh, grid, out_dir, tag);
      std::cout << "curve:   " << files.curve_csv.string() << "\n"
                << "summary: " << files.summary_json.string() << "\n";
      return 0;
    }

    if (*ctrl) {
      if (ctrl_n > 5) {
        std::cerr << "config error: controllability supports n <= 5\n";
        return 1;
      }
      const spinvar::ControllabilityReport rep =
          spinvar::controllability_report(ctrl_n, ctrl_model);
      const json j = spinvar::controllability_to_json(rep);
      fs::create_directories(out_dir);
      const fs::path file = fs::path(out_dir) / "controllability.json";
      std::ofstream f(file);
      f << j.dump(2) << "\n";
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*orc) {
      fs::create_directories(out_dir);
      const fs::path file = fs::path(out_dir) / "oracle.csv";
      std::ofstream f(file);
      f << "gamma_per_s,t_s,p0,cfi_omega\n";
      for (double g : linspace(orc_gmin, orc_gmax, orc_count))
        for (double t : linspace(orc_tmin, orc_tmax, orc_count)) {
          const auto r = spinvar::single_qubit_oracle(orc_omega, g, t);
          f << spinvar::format_double(g) << ',' << spinvar::format_double(t) << ','
            << spinvar::format_double(r.p0) << ',' << spinvar::format_double(r.cfi_omega) << "\n";
        }
      std::cout << "wrote " << file.string() << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
