#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinvar/analysis.hpp"
#include "spinvar/controllability.hpp"
#include "spinvar/metrology.hpp"
#include "spinvar/optimize.hpp"

// Batch experiment harness: declarative run configs, the (n, m, seed) grid
// runner with resume and a bounded worker pool, persistent JSON records and
// deterministic CSV aggregates.

namespace spinvar {

inline constexpr const char* software_version = "spinvar 0.1.0";

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// serialization helpers
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json spin_config_to_json(const SpinConfiguration& cfg) {
  json j;
  j["units"] = {{"positions", "nm"}, {"gamma", "rad s^-1 T^-1"}, {"field_axis", "dimensionless"}};
  j["positions"] = json::array();
  for (const auto& p : cfg.positions) j["positions"].push_back({p.x(), p.y(), p.z()});
  j["gamma"] = cfg.gamma;
  j["field_axis"] = {cfg.field_axis.x(), cfg.field_axis.y(), cfg.field_axis.z()};
  j["model"] = model_name(cfg.model);
  j["label"] = cfg.label;
  if (cfg.seed)
    j["seed"] = *cfg.seed;
  else
    j["seed"] = nullptr;
  return j;
}

inline SpinConfiguration spin_config_from_json(const json& j) {
  SpinConfiguration cfg;
  for (const auto& p : j.at("positions"))
    cfg.positions.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
  cfg.gamma = j.at("gamma").get<std::vector<double>>();
  const auto& f = j.at("field_axis");
  cfg.field_axis = Eigen::Vector3d(f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>());
  cfg.model = model_from_name(j.at("model").get<std::string>());
  cfg.label = j.value("label", std::string{});
  if (j.contains("seed") && !j.at("seed").is_null()) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

inline json record_to_json(const OptimizationRecord& rec) {
  json j;
  j["best_cost"] = rec.best_cost;
  j["best_x"] = std::vector<double>(rec.best_x.data(), rec.best_x.data() + rec.best_x.size());
  j["evaluations"] = rec.evaluations;
  j["generations"] = rec.generations;
  j["seed"] = rec.seed;
  j["wall_seconds"] = rec.wall_seconds;
  json trace = json::array();
  for (const auto& g : rec.trace) trace.push_back({g.best_cost, g.mean_cost, g.sigma});
  j["trace"] = std::move(trace);
  return j;
}

// ---------------------------------------------------------------------------
// experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  ConfigKind kind = ConfigKind::Chain;
  std::vector<int> n_values{2};
  double scale_nm = 10.0;
  std::vector<std::uint64_t> seeds;  // empty -> derived from master seed
  int seed_count = 1;
  Model model = Model::DipolarSpinHalf;
  std::vector<int> m_values{1};
  MeasurementBasis basis = MeasurementBasis::FullZ;
  PrepNoiseSpec noise;
  double ramsey_t2_s = 1.0;
  double ramsey_nu = 1.0;
  // CMA-ES settings
  int cma_lambda = 0;
  double cma_sigma0 = 0.3;
  int cma_max_generations = 2000;
  double cma_stagnation_tol = 1e-8;
  int cma_stagnation_window = 200;
  int restarts = 1;
  std::uint64_t master_seed = 0;
  std::string out_dir = "out";
  int workers = 1;

  json to_json() const {
    json j;
    j["configuration"] = {{"kind", config_kind_name(kind)},
                          {"n", n_values},
                          {"scale_nm", scale_nm},
                          {"seed_count", seed_count}};
    if (!seeds.empty()) j["configuration"]["seeds"] = seeds;
    j["model"] = model_name(model);
    j["m"] = m_values;
    j["basis"] = basis_name(basis);
    j["noise"] = {{"init_fidelity", noise.init_fidelity},
                  {"readout_fidelity", noise.readout_fidelity},
                  {"t2_prep_s", std::isinf(noise.t2_prep) ? json(nullptr) : json(noise.t2_prep)},
                  {"ramsey_t2_s", ramsey_t2_s},
                  {"ramsey_nu", ramsey_nu}};
    j["cmaes"] = {{"lambda", cma_lambda},
                  {"sigma0", cma_sigma0},
                  {"max_generations", cma_max_generations},
                  {"stagnation_tol", cma_stagnation_tol},
                  {"stagnation_window", cma_stagnation_window},
                  {"restarts", restarts}};
    j["seed"] = master_seed;
    j["out_dir"] = out_dir;
    j["workers"] = workers;
    return j;
  }
};

namespace detail {

inline void require_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.key().empty() && it.key().front() == '_') continue;  // comment keys
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown key '" + where + it.key() + "' in config");
  }
}

// an integer or an explicit list of integers
inline std::vector<int> parse_int_list(const json& j, const std::string& field) {
  if (j.is_number_integer()) return {j.get<int>()};
  if (j.is_array() && !j.empty()) {
    std::vector<int> out;
    for (const auto& v : j) {
      if (!v.is_number_integer())
        throw std::invalid_argument("field '" + field + "' must hold integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  throw std::invalid_argument("field '" + field + "' must be an integer or a nonempty list");
}

// [lo, hi] expanded inclusively
inline std::vector<int> parse_range(const json& j, const std::string& field) {
  if (j.is_array() && j.size() == 2 && j.at(0).is_number_integer() &&
      j.at(1).is_number_integer() && j.at(0).get<int>() <= j.at(1).get<int>()) {
    std::vector<int> out;
    for (int v = j.at(0).get<int>(); v <= j.at(1).get<int>(); ++v) out.push_back(v);
    return out;
  }
  throw std::invalid_argument("field '" + field + "' must be [lo, hi] with lo <= hi");
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  detail::require_keys(j, {"configuration", "model", "m", "m_range", "basis", "noise", "cmaes",
                           "seed", "out_dir", "workers"},
                       "");
  if (!j.contains("configuration"))
    throw std::invalid_argument("missing required field 'configuration'");
  const json& c = j.at("configuration");
  detail::require_keys(c, {"kind", "n", "n_range", "scale_nm", "seeds", "seed_count"},
                       "configuration.");
  cfg.kind = config_kind_from_name(c.at("kind").get<std::string>());
  if (c.contains("n") == c.contains("n_range"))
    throw std::invalid_argument("configuration needs exactly one of 'n' or 'n_range'");
  cfg.n_values = c.contains("n") ? detail::parse_int_list(c.at("n"), "configuration.n")
                                 : detail::parse_range(c.at("n_range"), "configuration.n_range");
  for (int n : cfg.n_values)
    if (n < 1 || n > 12)
      throw std::invalid_argument("field 'configuration.n' must stay within 1..12");
  cfg.scale_nm = c.value("scale_nm", 10.0);
  if (!(cfg.scale_nm > 0)) throw std::invalid_argument("field 'configuration.scale_nm' must be positive");
  if (c.contains("seeds")) cfg.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.seed_count = c.value("seed_count", 1);
  if (cfg.seeds.empty() && cfg.seed_count < 1)
    throw std::invalid_argument("field 'configuration.seed_count' must be >= 1");

  if (j.contains("model")) cfg.model = model_from_name(j.at("model").get<std::string>());
  if (j.contains("m") && j.contains("m_range"))
    throw std::invalid_argument("config needs at most one of 'm' or 'm_range'");
  if (j.contains("m")) cfg.m_values = detail::parse_int_list(j.at("m"), "m");
  if (j.contains("m_range")) cfg.m_values = detail::parse_range(j.at("m_range"), "m_range");
  for (int m : cfg.m_values)
    if (m < 0 || m > 12) throw std::invalid_argument("field 'm' must stay within 0..12");
  if (j.contains("basis")) cfg.basis = basis_from_name(j.at("basis").get<std::string>());

  if (j.contains("noise")) {
    const json& nz = j.at("noise");
    detail::require_keys(nz, {"init_fidelity", "readout_fidelity", "t2_prep_s", "ramsey_t2_s",
                              "ramsey_nu"},
                         "noise.");
    cfg.noise.init_fidelity = nz.value("init_fidelity", 1.0);
    cfg.noise.readout_fidelity = nz.value("readout_fidelity", 1.0);
    if (nz.contains("t2_prep_s") && !nz.at("t2_prep_s").is_null())
      cfg.noise.t2_prep = nz.at("t2_prep_s").get<double>();
    cfg.ramsey_t2_s = nz.value("ramsey_t2_s", 1.0);
    cfg.ramsey_nu = nz.value("ramsey_nu", 1.0);
    cfg.noise.validate();
    if (cfg.ramsey_nu < 1.0) throw std::invalid_argument("field 'noise.ramsey_nu' must be >= 1");
  }
  if (j.contains("cmaes")) {
    const json& cm = j.at("cmaes");
    detail::require_keys(cm, {"lambda", "sigma0", "max_generations", "stagnation_tol",
                              "stagnation_window", "restarts"},
                         "cmaes.");
    cfg.cma_lambda = cm.value("lambda", 0);
    cfg.cma_sigma0 = cm.value("sigma0", 0.3);
    cfg.cma_max_generations = cm.value("max_generations", 2000);
    cfg.cma_stagnation_tol = cm.value("stagnation_tol", 1e-8);
    cfg.cma_stagnation_window = cm.value("stagnation_window", 200);
    cfg.restarts = cm.value("restarts", 1);
    if (cfg.restarts < 1) throw std::invalid_argument("field 'cmaes.restarts' must be >= 1");
  }
  cfg.master_seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", std::string{"out"});
  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) throw std::invalid_argument("field 'workers' must be >= 1");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  json j;
  in >> j;
  return parse_experiment_config(j);
}

// FNV-1a over the canonical (sorted-key) dump.
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// instance grid
// ---------------------------------------------------------------------------

struct Instance {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  int index = 0;
};

inline std::vector<Instance> instance_grid(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty())
    for (int s = 0; s < cfg.seed_count; ++s)
      seeds.push_back(detail::splitmix64(cfg.master_seed ^ (0xabcdef1234567890ull + s)));
  std::vector<Instance> grid;
  int idx = 0;
  for (int n : cfg.n_values)
    for (int m : cfg.m_values)
      for (std::uint64_t s : seeds) grid.push_back({n, m, s, idx++});
  return grid;
}

struct InstanceResult {
  Instance instance;
  bool ok = false;
  std::string error;
  double f_dd_hz = 0.0;
  double cfi = 0.0;
  double fdd_T = 0.0;
  int generations = 0;
  long evaluations = 0;
  double wall_s = 0.0;
  json record;  // full per-instance JSON document
};

inline SpinConfiguration instance_configuration(const ExperimentConfig& cfg, const Instance& inst) {
  return generate_configuration(cfg.kind, inst.n, cfg.scale_nm, inst.seed, cfg.model);
}

// Run one grid instance: optimize, then characterize the best state.
inline InstanceResult run_instance(const ExperimentConfig& cfg, const Instance& inst,
                                   const std::string& hash) {
  InstanceResult res;
  res.instance = inst;
  try {
    const SpinConfiguration spins = instance_configuration(cfg, inst);
    CmaesConfig cma;
    cma.lambda = cfg.cma_lambda;
    cma.sigma0 = cfg.cma_sigma0;
    cma.max_generations = cfg.cma_max_generations;
    cma.stagnation_rel_tol = cfg.cma_stagnation_tol;
    cma.stagnation_window = cfg.cma_stagnation_window;

    EntanglerRun best;
    bool have = false;
    for (int r = 0; r < cfg.restarts; ++r) {
      cma.seed = detail::splitmix64(inst.seed ^ (0x5151795ull + r));
      EntanglerRun run = optimize_entangler(spins, inst.m, cfg.basis, cfg.noise, cma);
      if (!have || run.cfi > best.cfi) {
        best = std::move(run);
        have = true;
      }
    }

    res.ok = true;
    res.f_dd_hz = best.f_dd_hz;
    res.cfi = best.cfi;
    res.fdd_T = best.prep_time_fdd;
    res.generations = best.record.generations;
    res.evaluations = best.record.evaluations;
    res.wall_s = best.record.wall_seconds;

    json j;
    j["config_hash"] = hash;
    j["software_version"] = software_version;
    j["n"] = inst.n;
    j["m"] = inst.m;
    j["seed"] = inst.seed;
    j["kind"] = config_kind_name(cfg.kind);
    j["model"] = model_name(cfg.model);
    j["basis"] = basis_name(cfg.basis);
    j["f_dd_hz"] = res.f_dd_hz;
    j["cfi"] = res.cfi;
    j["fdd_T"] = res.fdd_T;
    j["noise"] = {{"init_fidelity", cfg.noise.init_fidelity},
                  {"readout_fidelity", cfg.noise.readout_fidelity},
                  {"t2_prep_s",
                   std::isinf(cfg.noise.t2_prep) ? json(nullptr) : json(cfg.noise.t2_prep)}};
    j["tau_bound_s"] = best.params.tau_bound;
    j["theta"] = std::vector<double>(best.params.theta.data(),
                                     best.params.theta.data() + best.params.theta.size());
    j["optimization"] = record_to_json(best.record);
    j["spin_configuration"] = spin_config_to_json(spins);
    {
      const auto now = std::chrono::system_clock::now();
      const std::time_t tt = std::chrono::system_clock::to_time_t(now);
      char buf[32];
      std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
      j["timestamp_utc"] = buf;
    }

    // derived characterization of the re-simulated best state
    const CouplingMatrix coupling = coupling_matrix(spins);
    const Hamiltonian h = build_hamiltonian(coupling, spins.model);
    const QuantumState out = [&] {
      QuantumState in = initial_state(inst.n, cfg.noise.init_fidelity);
      if (std::isinf(cfg.noise.t2_prep)) return apply_entangler(best.params, h, std::move(in));
      return apply_entangler_dephasing(best.params, h, std::move(in),
                                       1.0 / (2.0 * cfg.noise.t2_prep));
    }();
    json derived;
    if (inst.n >= 2) {
      std::vector<double> entropies;
      for (int i = 0; i < inst.n; ++i) entropies.push_back(von_neumann_entropy(out, {i}));
      derived["single_spin_entropies_bits"] = entropies;
      const ClusterPartition part = cluster_partition(out);
      std::vector<int> sizes;
      for (const auto& b : part.blocks) sizes.push_back(static_cast<int>(b.size()));
      derived["cluster_sizes"] = sizes;
      derived["max_cluster_size"] = part.max_block_size();
      derived["cluster_threshold_bits"] = part.threshold;
    }
    try {
      derived["squeezing_xi2"] = squeezing_parameter(out);
    } catch (const std::exception&) {
      derived["squeezing_xi2"] = nullptr;  // vanishing mean spin
    }
    j["derived"] = std::move(derived);
    res.record = std::move(j);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
    json j;
    j["config_hash"] = hash;
    j["n"] = inst.n;
    j["m"] = inst.m;
    j["seed"] = inst.seed;
    j["error"] = res.error;
    res.record = std::move(j);
  }
  return res;
}

struct OptimizeOutcome {
  int completed = 0;
  int skipped = 0;   // resumed
  int failed = 0;
  std::filesystem::path aggregate_csv;
  std::filesystem::path summary_csv;
};

inline std::string instance_filename(const Instance& inst) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "record_n%02d_m%02d_s%020llu.json", inst.n, inst.m,
                static_cast<unsigned long long>(inst.seed));
  return buf;
}

// Grid runner: worker pool over instances, resume by config hash, and a
// deterministic aggregate CSV regenerated from the per-instance records.
inline OptimizeOutcome cmd_optimize(const ExperimentConfig& cfg, bool resume) {
  namespace fs = std::filesystem;
  OptimizeOutcome out;
  const json cfg_json = cfg.to_json();
  const std::string hash = config_hash(cfg_json);
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream f(fs::path(cfg.out_dir) / "config.json");
    f << cfg_json.dump(2) << "\n";
  }

  const std::vector<Instance> grid = instance_grid(cfg);
  std::vector<InstanceResult> results(grid.size());
  std::vector<int> todo;
  for (const auto& inst : grid) {
    const fs::path file = fs::path(cfg.out_dir) / instance_filename(inst);
    bool skip = false;
    if (resume && fs::exists(file)) {
      try {
        std::ifstream in(file);
        json j;
        in >> j;
        if (j.value("config_hash", std::string{}) == hash && !j.contains("error")) {
          InstanceResult r;
          r.instance = inst;
          r.ok = true;
          r.f_dd_hz = j.value("f_dd_hz", 0.0);
          r.cfi = j.value("cfi", 0.0);
          r.fdd_T = j.value("fdd_T", 0.0);
          r.generations = j.at("optimization").value("generations", 0);
          r.evaluations = j.at("optimization").value("evaluations", 0L);
          r.wall_s = j.at("optimization").value("wall_seconds", 0.0);
          r.record = std::move(j);
          results[inst.index] = std::move(r);
          skip = true;
          ++out.skipped;
        }
      } catch (const std::exception&) {
        skip = false;  // unreadable record: recompute
      }
    }
    if (!skip) todo.push_back(inst.index);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) {
      const Instance& inst = grid[todo[k]];
      results[inst.index] = run_instance(cfg, inst, hash);
    }
  };
  if (cfg.workers <= 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    for (int w = 0; w < cfg.workers; ++w) futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  for (const auto& inst : grid) {
    if (std::find(todo.begin(), todo.end(), inst.index) == todo.end()) continue;
    const auto& r = results[inst.index];
    std::ofstream f(fs::path(cfg.out_dir) / instance_filename(inst));
    f << r.record.dump(2) << "\n";
    if (r.ok)
      ++out.completed;
    else
      ++out.failed;
  }

  // aggregate CSV, one row per successful instance, fixed column order
  out.aggregate_csv = fs::path(cfg.out_dir) / "aggregate.csv";
  {
    std::ofstream csv(out.aggregate_csv);
    csv << "n,m,seed,cfi,fdd_T,generations,wall_s\n";
    for (const auto& inst : grid) {
      const auto& r = results[inst.index];
      if (!r.ok) continue;
      csv << inst.n << ',' << inst.m << ',' << inst.seed << ',' << format_double(r.cfi) << ','
          << format_double(r.fdd_T) << ',' << r.generations << ',' << format_double(r.wall_s)
          << "\n";
    }
  }
  // mean and standard error across seeds per (n, m)
  out.summary_csv = fs::path(cfg.out_dir) / "summary.csv";
  {
    std::ofstream csv(out.summary_csv);
    csv << "n,m,seeds,cfi_mean,cfi_stderr,fdd_T_mean,fdd_T_stderr\n";
    for (int n : cfg.n_values)
      for (int m : cfg.m_values) {
        std::vector<double> cfis, preps;
        for (const auto& inst : grid)
          if (inst.n == n && inst.m == m && results[inst.index].ok) {
            cfis.push_back(results[inst.index].cfi);
            preps.push_back(results[inst.index].fdd_T);
          }
        if (cfis.empty()) continue;
        auto mean_se = [](const std::vector<double>& v) {
          double mean = 0.0;
          for (double x : v) mean += x;
          mean /= v.size();
          double var = 0.0;
          for (double x : v) var += (x - mean) * (x - mean);
          const double se = v.size() > 1 ? std::sqrt(var / (v.size() - 1) / v.size()) : 0.0;
          return std::pair<double, double>(mean, se);
        };
        const auto [cm, cs] = mean_se(cfis);
        const auto [pm, ps] = mean_se(preps);
        csv << n << ',' << m << ',' << cfis.size() << ',' << format_double(cm) << ','
            << format_double(cs) << ',' << format_double(pm) << ',' << format_double(ps) << "\n";
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// analyze / ramsey / controllability back-ends
// ---------------------------------------------------------------------------

struct RecordState {
  SpinConfiguration spins;
  CircuitParams params;
  double f_dd_hz = 0.0;
  QuantumState state;
};

// Rebuild the recorded state deterministically, under the same preparation
// noise model the instance was optimized with.
inline RecordState resimulate_record(const std::filesystem::path& record_file) {
  std::ifstream in(record_file);
  if (!in) throw std::invalid_argument("cannot open record " + record_file.string());
  json j;
  in >> j;
  if (j.contains("error")) throw std::invalid_argument("record holds a failed instance");
  SpinConfiguration spins = spin_config_from_json(j.at("spin_configuration"));
  const std::vector<double> theta = j.at("theta").get<std::vector<double>>();
  CircuitParams params;
  params.m = j.at("m").get<int>();
  params.tau_bound = j.at("tau_bound_s").get<double>();
  params.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
  PrepNoiseSpec noise;
  if (j.contains("noise")) {
    const json& nz = j.at("noise");
    noise.init_fidelity = nz.value("init_fidelity", 1.0);
    noise.readout_fidelity = nz.value("readout_fidelity", 1.0);
    if (nz.contains("t2_prep_s") && !nz.at("t2_prep_s").is_null())
      noise.t2_prep = nz.at("t2_prep_s").get<double>();
  }
  const Hamiltonian h = build_hamiltonian(coupling_matrix(spins), spins.model);
  QuantumState in_state = initial_state(spins.n_spins(), noise.init_fidelity);
  QuantumState out = std::isinf(noise.t2_prep)
                         ? apply_entangler(params, h, std::move(in_state))
                         : apply_entangler_dephasing(params, h, std::move(in_state),
                                                     1.0 / (2.0 * noise.t2_prep));
  return RecordState{std::move(spins), std::move(params), j.at("f_dd_hz").get<double>(),
                     std::move(out)};
}

inline void write_wigner_csv(const WignerGrid& grid, const std::filesystem::path& path) {
  std::ofstream f(path);
  f << "# " << grid.convention << "; trace_sym=" << format_double(grid.trace_sym) << "\n";
  f << "theta,phi,w\n";
  for (std::size_t i = 0; i < grid.theta.size(); ++i)
    for (std::size_t j = 0; j < grid.phi.size(); ++j)
      f << format_double(grid.theta[i]) << ',' << format_double(grid.phi[j]) << ','
        << format_double(grid.values(i, j)) << "\n";
}

inline json cluster_to_json(const ClusterPartition& part) {
  json j;
  j["threshold_bits"] = part.threshold;
  j["blocks"] = part.blocks;
  j["block_entropies_bits"] = part.block_entropies;
  return j;
}

struct RamseyCurveFiles {
  std::filesystem::path curve_csv;
  std::filesystem::path summary_json;
};

inline RamseyCurveFiles cmd_ramsey(const QuantumState& probe, double t2, double nu, double t_oh,
                                   const std::vector<double>& t_grid,
                                   const std::filesystem::path& out_dir,
                                   const std::string& tag) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const SnrCurve curve = ramsey_snr_curve(probe, t2, nu, t_grid);
  const OverheadAnalysis oh = snr_with_overhead(probe, t2, nu, t_oh, t_grid);

  RamseyCurveFiles files;
  files.curve_csv = out_dir / ("ramsey_" + tag + ".csv");
  std::ofstream csv(files.curve_csv);
  csv << "t_s,cfi_omega,cfi_omega_over_t,snr2_overhead\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    csv << format_double(curve.points[i].t) << ',' << format_double(curve.points[i].cfi_omega)
        << ',' << format_double(curve.points[i].cfi_omega_over_t) << ','
        << format_double(oh.snr2[i]) << "\n";

  json summary;
  summary["t2_s"] = t2;
  summary["nu"] = nu;
  summary["t_oh_s"] = t_oh;
  summary["n_spins"] = probe.n_spins();
  summary["best_t_s"] = curve.best_t;
  summary["best_cfi_omega_over_t"] = curve.best_value;
  summary["overhead_optimal_t_s"] = oh.optimal_t;
  summary["overhead_optimal_snr2"] = oh.optimal_snr2;
  summary["css_optimum_closed_form_s"] = oh.css_optimum_closed;
  summary["ghz_optimum_closed_form_s"] = oh.ghz_optimum_closed;
  summary["ghz_css_snr2_ratio_closed_form"] = oh.ghz_css_ratio_closed;
  files.summary_json = out_dir / ("ramsey_" + tag + "_summary.json");
  std::ofstream js(files.summary_json);
  js << summary.dump(2) << "\n";
  return files;
}

inline json controllability_to_json(const ControllabilityReport& rep) {
  json j;
  j["n"] = rep.n;
  j["model"] = rep.model;
  j["dim"] = rep.dim;
  j["dim_with_identity"] = rep.dim_with_identity;
  j["subspace_bound"] = rep.subspace_bound;
  j["complete_su"] = rep.complete_su;
  j["complete_u"] = rep.complete_u;
  j["budget_exhausted"] = rep.budget_exhausted;
  j["verdict"] = rep.verdict;
  return j;
}

}  // namespace spinvar
