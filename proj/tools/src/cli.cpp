#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ionfilter/darkstate.hpp"
#include "ionfilter/laguerre.hpp"
#include "ionfilter/serialization.hpp"

namespace ionfilter::cli {
namespace {

namespace fs = std::filesystem;
using ordered = nlohmann::ordered_json;

class Log {
 public:
  Log(std::ostream& err, int level) : err_(err), level_(level) {}
  void info(const std::string& msg) const {
    if (level_ >= 1) err_ << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= 2) err_ << "[debug] " << msg << '\n';
  }
  void error(const std::string& msg) const { err_ << "error: " << msg << '\n'; }

 private:
  std::ostream& err_;
  int level_;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// Command-line flags that override config fields, addressed by JSON pointer.
struct Override {
  const char* flag;
  const char* pointer;
  bool numeric;
  const char* help;
};

const std::vector<Override>& override_table() {
  static const std::vector<Override> table = {
      {"--levels", "/levels", true, "Fock truncation N"},
      {"--j", "/drives/j/order", true, "sideband order j"},
      {"--m", "/drives/m/order", true, "sideband order m"},
      {"--eta-j", "/drives/j/eta", true, "Lamb-Dicke parameter of the j drive"},
      {"--eta-m", "/drives/m/eta", true, "Lamb-Dicke parameter of the m drive"},
      {"--rabi-j", "/drives/j/rabi", true, "Rabi frequency of the j drive"},
      {"--rabi-m", "/drives/m/rabi", true, "Rabi frequency of the m drive"},
      {"--gamma", "/emission/gamma", true, "decay rate"},
      {"--eta-e", "/emission/eta_e", true, "emission Lamb-Dicke parameter"},
      {"--angular", "/emission/angular", false, "dipole or isotropic"},
      {"--quadrature-order", "/emission/quadrature_order", true, "angular quadrature order"},
      {"--initial", "/initial/kind", false, "thermal, number or coherent"},
      {"--nbar", "/initial/nbar", true, "thermal occupation"},
      {"--t-final", "/evolution/t_final", true, "evolution time in units of 1/Gamma"},
      {"--sample-stride", "/evolution/sample_stride", true, "time between samples"},
      {"--target", "/target", false, "dark or none"},
      {"--prefix", "/output/prefix", false, "output file prefix"},
      {"--seed", "/seed", true, "seed for sweep ordering"},
  };
  return table;
}

struct ConfigArgs {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    for (const Override& o : override_table()) app->add_option(o.flag, values[o.flag], o.help);
  }

  RunConfig load(const std::string& output_dir) const {
    RunConfig cfg = default_run_config();
    if (!config_path.empty()) cfg = parse_run_config(read_file(config_path), cfg);
    nlohmann::json patch = nlohmann::json::object();
    for (const Override& o : override_table()) {
      const std::string& v = values.at(o.flag);
      if (v.empty()) continue;
      nlohmann::json value;
      if (o.numeric) {
        try {
          value = nlohmann::json::parse(v);
        } catch (const nlohmann::json::exception&) {
          throw ConfigError(std::string(o.flag) + ": '" + v + "' is not a number");
        }
        if (!value.is_number()) throw ConfigError(std::string(o.flag) + ": '" + v + "' is not a number");
      } else {
        value = v;
      }
      patch[nlohmann::json::json_pointer(o.pointer)] = value;
    }
    if (!patch.empty()) cfg = parse_run_config(patch.dump(), cfg);
    if (cfg.output_dir.empty()) cfg.output_dir = output_dir;
    return cfg;
  }
};

fs::path output_path(const RunConfig& cfg, const std::string& suffix) {
  return fs::path(cfg.output_dir) / (cfg.output_prefix + suffix);
}

ordered parse_ordered(const std::string& text) { return ordered::parse(text); }

ordered drive_config_json(const DriveConfig& c) {
  auto drive = [](const LaserDrive& d) {
    return ordered{{"order", d.sideband_order},
                   {"eta", d.lamb_dicke},
                   {"rabi", std::abs(d.rabi)},
                   {"phase", std::arg(d.rabi)}};
  };
  return {{"j", drive(c.drive_j)}, {"m", drive(c.drive_m)}};
}

std::optional<Vector> dark_target(const RunConfig& cfg, const Log& log) {
  if (cfg.target == TargetKind::None) return std::nullopt;
  if (cfg.drives.spacing() != 1) {
    log.info("note: no analytic target for j - m = " + std::to_string(cfg.drives.spacing()) +
             "; fidelity column left blank");
    return std::nullopt;
  }
  const DarkStateResult dark = dark_coefficients_adjacent(cfg.drives, cfg.space());
  return dark.coefficients;
}

struct EvolveSummary {
  double final_time = 0.0;
  std::optional<double> fidelity;
  double fluorescence = 0.0;
  double mean_number = 0.0;
  double purity = 0.0;
  bool reached_steady = false;
};

EvolveSummary run_evolve(const RunConfig& cfg, const Log& log) {
  const FockSpace space = cfg.space();
  const VibronicOperator h = build_interaction_hamiltonian(cfg.drives, space);
  const std::optional<Vector> target = dark_target(cfg, log);
  EvolutionConfig ev = cfg.evolution;
  ev.keep_snapshots = false;
  log.debug("evolving " + std::to_string(space.vibronic_dim()) + "-dimensional state to t = " +
            fmt17(ev.t_final));
  const Trajectory traj = evolve(make_initial_state(cfg.initial, space), h, cfg.emission, ev, target);

  std::ostringstream csv;
  write_trajectory_csv(csv, traj, space);
  write_file(output_path(cfg, "_trajectory.csv"), csv.str());
  const ObservableRecord& last = traj.final_observables();
  write_file(output_path(cfg, "_final.json"), density_json(traj.final_state().matrix(), space, last.time) + "\n");
  log.debug("steps accepted " + std::to_string(traj.steps_accepted) + ", rejected " +
            std::to_string(traj.steps_rejected));

  EvolveSummary s;
  s.final_time = last.time;
  s.fidelity = last.fidelity;
  s.fluorescence = last.fluorescence;
  s.mean_number = last.mean_number;
  s.purity = last.purity;
  s.reached_steady = traj.reached_steady;
  return s;
}

ordered run_steady(const RunConfig& cfg, const Log& log) {
  const FockSpace space = cfg.space();
  if (space.levels() > kNullspaceMaxLevels) {
    throw ConfigError("steady: N = " + std::to_string(space.levels()) +
                      " exceeds the null-space cap of " + std::to_string(kNullspaceMaxLevels) +
                      " levels (the superoperator would be " + std::to_string(4 * space.levels() * space.levels()) +
                      " square); use 'evolve' for larger truncations");
  }
  const VibronicOperator h = build_interaction_hamiltonian(cfg.drives, space);
  const Matrix l = build_liouvillian(h, cfg.emission, space, 2 * kNullspaceMaxLevels);
  const SteadyStateResult r = steady_state_nullspace(l, space);
  ordered doc = {{"levels", space.levels()},
                 {"kernel_dimension", r.kernel_dimension},
                 {"liouvillian_nullity", r.liouvillian_nullity},
                 {"degenerate", r.degenerate},
                 {"threshold", r.threshold},
                 {"largest_null_singular_value", r.largest_null_singular_value},
                 {"smallest_regular_singular_value", r.smallest_regular_singular_value}};
  if (r.degenerate) {
    doc["note"] = "the Liouvillian vanishes identically; every density matrix is stationary";
    return doc;
  }
  if (r.states.size() == 1) {
    const Matrix& rho = r.states[0];
    doc["fluorescence"] = fluorescence_rate(rho, cfg.emission.gamma, space);
    doc["purity"] = purity(rho);
    const std::optional<Vector> target = dark_target(cfg, log);
    if (target) {
      const Vector psi = embed(*target);
      doc["fidelity"] = std::clamp((psi.adjoint() * rho * psi)(0).real(), 0.0, 1.0);
    }
  }
  return doc;
}

int numerical_failure(const Log& log, const std::string& msg) {
  log.error(msg);
  return kNumericalError;
}

// Evaluates one sweep point; returns the summary row and an exit status.
std::pair<std::string, int> sweep_point(const RunConfig& cfg, const std::string& mode, const Log& log) {
  std::ostringstream row;
  try {
    if (mode == "evolve") {
      const EvolveSummary s = run_evolve(cfg, log);
      row << fmt17(s.final_time) << ',' << (s.fidelity ? fmt17(*s.fidelity) : "") << ','
          << fmt17(s.fluorescence) << ',' << fmt17(s.mean_number);
    } else {
      const ordered doc = run_steady(cfg, log);
      write_file(output_path(cfg, "_steady.json"), doc.dump(2) + "\n");
      row << doc["kernel_dimension"].get<int>() << ','
          << (doc.contains("fidelity") ? fmt17(doc["fidelity"].get<double>()) : "");
    }
    return {row.str(), kOk};
  } catch (const ConfigError& e) {
    return {std::string("error: ") + e.what(), kConfigError};
  } catch (const InvalidArgument& e) {
    return {std::string("error: ") + e.what(), kConfigError};
  } catch (const NumericalError& e) {
    return {std::string("error: ") + e.what(), kNumericalError};
  }
}

FilterSpec parse_filter(const std::vector<std::string>& words, double ratio, int sign) {
  if (words.empty()) throw ConfigError("design: missing filter kind");
  const std::string& kind = words[0];
  auto integer = [&](std::size_t i) {
    if (i >= words.size()) throw ConfigError("design " + kind + ": missing integer argument");
    try {
      std::size_t used = 0;
      const int v = std::stoi(words[i], &used);
      if (used != words[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("design " + kind + ": '" + words[i] + "' is not an integer");
    }
  };
  auto expect = [&](std::size_t n) {
    if (words.size() != n) throw ConfigError("design " + kind + ": expected " + std::to_string(n - 1) + " integer argument(s)");
  };
  FilterSpec spec;
  if (kind == "low-pass") {
    expect(2);
    spec = LowPass{integer(1)};
  } else if (kind == "high-pass") {
    expect(2);
    spec = HighPass{integer(1)};
  } else if (kind == "band-pass") {
    expect(3);
    spec = BandPass{integer(1), integer(2)};
  } else if (kind == "number-state") {
    expect(2);
    spec = NumberState{integer(1)};
  } else if (kind == "qubit") {
    expect(1);
    spec = Qubit{ratio, sign};
  } else {
    throw ConfigError("design: unknown filter kind '" + kind +
                      "' (low-pass, high-pass, band-pass, number-state, qubit)");
  }
  try {
    validate(spec);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
  return spec;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Number-state filtering of a trapped ion: design, dark states and master-equation dynamics",
               "ionfilter"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  bool verbose = false;
  std::string output_dir;
  app.add_flag("-q,--quiet", quiet, "only print results and errors");
  app.add_flag("-v,--verbose", verbose, "print solver diagnostics");
  app.add_option("-o,--output-dir", output_dir,
                 "directory for output files (default: $IONFILTER_OUTPUT_DIR or the working directory)");

  auto* zeros_cmd = app.add_subcommand("laguerre-zeros", "zeros of L_n^(alpha) and the matching Lamb-Dicke parameters");
  std::vector<int> zero_n;
  std::vector<int> zero_alpha{0};
  std::string zero_csv;
  zeros_cmd->add_option("-n,--n", zero_n, "polynomial degrees")->required();
  zeros_cmd->add_option("-a,--alpha", zero_alpha, "orders alpha")->capture_default_str();
  zeros_cmd->add_option("--csv", zero_csv, "also write the table to this file name");

  auto* dark_cmd = app.add_subcommand("darkstate", "analytic dark state (or numerical dark basis) as JSON");
  ConfigArgs dark_args;
  dark_args.attach(dark_cmd);

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate the master equation; writes a CSV trajectory and the final state");
  ConfigArgs evolve_args;
  evolve_args.attach(evolve_cmd);

  auto* steady_cmd = app.add_subcommand("steady", "steady states from the Liouvillian null space (N <= 16)");
  ConfigArgs steady_args;
  steady_args.attach(steady_cmd);

  auto* design_cmd = app.add_subcommand("design", "choose Lamb-Dicke parameters for a filter zone");
  std::vector<std::string> design_words;
  double d_ratio = 1.0;
  int d_sign = -1;
  std::optional<double> d_free_eta;
  double d_rabi = 0.2;
  double d_rabi_ratio = 1.0;
  int d_levels = 30;
  int d_m_root = 0;
  int d_j_root = 0;
  bool d_verify = false;
  std::optional<double> d_eta_e;
  std::string d_angular = "dipole";
  double d_gamma = 1.0;
  double d_t_final = 2000.0;
  double d_nbar = 0.3;
  std::string d_prefix = "design";
  design_cmd->add_option("spec", design_words,
                         "low-pass Q | high-pass P | band-pass P Q | number-state Q | qubit")
      ->required();
  design_cmd->add_option("--ratio", d_ratio, "qubit: target |C1/C0|");
  design_cmd->add_option("--sign", d_sign, "qubit: sign of C1/C0 (+1 or -1)");
  design_cmd->add_option("--eta1,--free-eta", d_free_eta,
                         "Lamb-Dicke parameter of the drive the zone leaves free (default 0.5)");
  design_cmd->add_option("--rabi", d_rabi, "Omega_j");
  design_cmd->add_option("--rabi-ratio", d_rabi_ratio, "Omega_m / Omega_j (zones only)");
  design_cmd->add_option("--levels", d_levels, "Fock truncation N");
  design_cmd->add_option("--m-root", d_m_root, "index of the L_q zero (0 = smallest)");
  design_cmd->add_option("--j-root", d_j_root, "index of the L_p^(1) zero (0 = smallest)");
  design_cmd->add_flag("--verify", d_verify, "simulate the design and report fidelities");
  design_cmd->add_option("--eta-e", d_eta_e, "emission Lamb-Dicke parameter for --verify (default eta_m)");
  design_cmd->add_option("--angular", d_angular, "dipole or isotropic");
  design_cmd->add_option("--gamma", d_gamma, "decay rate for --verify");
  design_cmd->add_option("--t-final", d_t_final, "evolution time for --verify");
  design_cmd->add_option("--nbar", d_nbar, "initial thermal occupation for --verify");
  design_cmd->add_option("--prefix", d_prefix, "output file prefix");

  auto* sweep_cmd = app.add_subcommand("sweep", "run one config over a list of parameter values, concurrently");
  ConfigArgs sweep_args;
  sweep_args.attach(sweep_cmd);
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_mode = "evolve";
  unsigned sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
  sweep_cmd->add_option("--param", sweep_param, "dotted config path, e.g. drives.m.rabi")->required();
  sweep_cmd->add_option("--values", sweep_values, "values to substitute")->required()->delimiter(',');
  sweep_cmd->add_option("--mode", sweep_mode, "evolve or steady")
      ->check(CLI::IsMember({"evolve", "steady"}));
  sweep_cmd->add_option("--jobs", sweep_jobs, "concurrent runs")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  const Log log(err, quiet ? 0 : (verbose ? 2 : 1));
  if (output_dir.empty()) {
    const char* env = std::getenv("IONFILTER_OUTPUT_DIR");
    output_dir = env && *env ? env : ".";
  }

  try {
    if (*zeros_cmd) {
      std::ostringstream table;
      table << "n,alpha,index,x,eta\n";
      for (int n : zero_n) {
        for (int alpha : zero_alpha) {
          const std::vector<double> z = laguerre::zeros(n, alpha);
          for (std::size_t k = 0; k < z.size(); ++k)
            table << n << ',' << alpha << ',' << k << ',' << fmt17(z[k]) << ',' << fmt17(std::sqrt(z[k])) << '\n';
        }
      }
      out << table.str();
      if (!zero_csv.empty()) write_file(fs::path(output_dir) / zero_csv, table.str());
      return kOk;
    }

    if (*dark_cmd) {
      const RunConfig cfg = dark_args.load(output_dir);
      if (cfg.drives.spacing() == 1) {
        const DarkStateResult s = dark_coefficients_adjacent(cfg.drives, cfg.space());
        const fs::path path = output_path(cfg, "_state.json");
        write_file(path, dark_state_json(s) + "\n");
        for (const std::string& w : s.warnings) log.info("warning: " + w);
        out << "support [" << s.support_min << ", " << s.support_max << "]"
            << (s.truncation_limited ? " (truncation-limited)" : "") << ", converged "
            << (s.converged ? "yes" : "no") << ", tail " << fmt17(s.tail_weight) << "\nwrote "
            << path.string() << '\n';
        if (!s.converged)
          return numerical_failure(log, "dark state tail weight " + fmt17(s.tail_weight) +
                                            " exceeds 1e-10 at N = " + std::to_string(cfg.levels) +
                                            "; increase the truncation");
        return kOk;
      }
      const DarkSpaceBasis b = dark_space_basis(cfg.drives, cfg.space());
      ordered vectors = ordered::array();
      for (std::size_t i = 0; i < b.basis.size(); ++i) {
        ordered re = ordered::array();
        ordered im = ordered::array();
        for (Eigen::Index k = 0; k < b.basis[i].size(); ++k) {
          re.push_back(b.basis[i](k).real());
          im.push_back(b.basis[i](k).imag());
        }
        vectors.push_back({{"residue", b.residue[i]}, {"re", re}, {"im", im}});
      }
      const ordered doc = {{"n", cfg.levels},
                           {"dimension", b.dimension},
                           {"spacing", cfg.drives.spacing()},
                           {"threshold", b.threshold},
                           {"kernel_norm", b.kernel_norm},
                           {"basis", vectors}};
      const fs::path path = output_path(cfg, "_basis.json");
      write_file(path, doc.dump(2) + "\n");
      out << "dark space dimension " << b.dimension << "\nwrote " << path.string() << '\n';
      return kOk;
    }

    if (*evolve_cmd) {
      const RunConfig cfg = evolve_args.load(output_dir);
      const EvolveSummary s = run_evolve(cfg, log);
      out << "t = " << fmt17(s.final_time) << (s.reached_steady ? " (steady)" : "")
          << ", fluorescence " << fmt17(s.fluorescence) << ", <n> " << fmt17(s.mean_number);
      if (s.fidelity) out << ", fidelity " << fmt17(*s.fidelity);
      out << "\nwrote " << output_path(cfg, "_trajectory.csv").string() << " and "
          << output_path(cfg, "_final.json").string() << '\n';
      return kOk;
    }

    if (*steady_cmd) {
      const RunConfig cfg = steady_args.load(output_dir);
      const ordered doc = run_steady(cfg, log);
      const fs::path path = output_path(cfg, "_steady.json");
      write_file(path, doc.dump(2) + "\n");
      out << doc.dump(2) << "\nwrote " << path.string() << '\n';
      return kOk;
    }

    if (*design_cmd) {
      const FilterSpec spec = parse_filter(design_words, d_ratio, d_sign);
      DesignOptions opt;
      opt.levels = d_levels;
      opt.rabi_j = d_rabi;
      opt.rabi_ratio = d_rabi_ratio;
      opt.free_eta = d_free_eta.value_or(0.5);
      opt.zeros = {d_m_root, d_j_root};
      const Design design = design_filter(spec, opt);
      const DriveConfig& c = design.config;
      for (const std::string& w : design.predicted.warnings) log.info("warning: " + w);

      ordered doc = {{"spec", describe(spec)},
                     {"levels", d_levels},
                     {"drives", drive_config_json(c)},
                     {"rabi_ratio", std::abs(c.drive_m.rabi) / std::abs(c.drive_j.rabi)},
                     {"predicted", parse_ordered(dark_state_json(design.predicted))}};
      out << describe(spec) << ": eta_j = " << fmt17(c.drive_j.lamb_dicke)
          << ", eta_m = " << fmt17(c.drive_m.lamb_dicke) << ", Omega_m/Omega_j = "
          << fmt17(std::abs(c.drive_m.rabi) / std::abs(c.drive_j.rabi)) << ", support ["
          << design.predicted.support_min << ", " << design.predicted.support_max << "]\n";

      int status = kOk;
      if (d_verify) {
        EmissionSpec em;
        em.gamma = d_gamma;
        em.eta_e = d_eta_e.value_or(c.drive_m.lamb_dicke);
        if (d_angular == "dipole") {
          em.angular = AngularKind::Dipole;
        } else if (d_angular == "isotropic") {
          em.angular = AngularKind::Isotropic;
        } else {
          throw ConfigError("design: --angular must be dipole or isotropic");
        }
        EvolutionConfig ev;
        ev.t_final = d_t_final;
        ev.sample_stride = std::max(1.0, d_t_final / 200.0);
        ev.keep_snapshots = false;
        const VerificationReport rep = verify_design(design, em, ev, d_nbar);
        ordered v = {{"eta_e", em.eta_e},
                     {"final_time", rep.final_time},
                     {"reached_steady", rep.reached_steady},
                     {"evolution_fidelity", rep.evolution_fidelity},
                     {"final_fluorescence", rep.final_fluorescence},
                     {"out_of_zone", rep.out_of_zone}};
        if (std::holds_alternative<Qubit>(spec)) v["measured_ratio"] = rep.measured_ratio;
        if (rep.kernel_dimension) v["kernel_dimension"] = *rep.kernel_dimension;
        if (rep.nullspace_fidelity) v["nullspace_fidelity"] = *rep.nullspace_fidelity;
        doc["verification"] = v;
        out << "verification: fidelity " << fmt17(rep.evolution_fidelity) << " at t = "
            << fmt17(rep.final_time) << ", fluorescence " << fmt17(rep.final_fluorescence) << '\n';
      }
      if (!design.predicted.converged) {
        log.error("predicted dark state is not converged at N = " + std::to_string(d_levels) +
                  " (tail " + fmt17(design.predicted.tail_weight) + ")");
        status = kNumericalError;
      }
      const fs::path path = fs::path(output_dir) / (d_prefix + "_design.json");
      write_file(path, doc.dump(2) + "\n");
      out << "wrote " << path.string() << '\n';
      return status;
    }

    if (*sweep_cmd) {
      const RunConfig base = sweep_args.load(output_dir);
      std::string pointer = "/" + sweep_param;
      std::replace(pointer.begin(), pointer.end(), '.', '/');
      const nlohmann::json base_doc = nlohmann::json::parse(to_json(base));

      std::vector<RunConfig> configs;
      for (std::size_t i = 0; i < sweep_values.size(); ++i) {
        nlohmann::json doc = base_doc;
        const nlohmann::json::json_pointer ptr(pointer);
        if (!doc.contains(ptr)) throw ConfigError("sweep: unknown parameter '" + sweep_param + "'");
        doc[ptr] = sweep_values[i];
        doc["output"]["prefix"] = base.output_prefix + "_" + std::to_string(i);
        configs.push_back(parse_run_config(doc.dump(), base));
      }

      std::vector<std::size_t> order(configs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::mt19937_64 rng(base.seed);
      std::shuffle(order.begin(), order.end(), rng);

      const Log quiet_log(err, 0);
      std::vector<std::pair<std::string, int>> rows(configs.size());
      std::vector<std::future<void>> running;
      for (std::size_t idx : order) {
        if (running.size() >= sweep_jobs) {
          running.front().get();
          running.erase(running.begin());
        }
        running.push_back(std::async(std::launch::async, [&, idx] {
          rows[idx] = sweep_point(configs[idx], sweep_mode, quiet_log);
        }));
      }
      for (auto& f : running) f.get();

      out << "index,value," << (sweep_mode == "evolve" ? "final_time,fidelity,fluorescence,mean_number" : "kernel_dimension,fidelity")
          << '\n';
      int status = kOk;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i << ',' << fmt17(sweep_values[i]) << ',' << rows[i].first << '\n';
        status = std::max(status, rows[i].second);
      }
      return status;
    }
  } catch (const UndesignableError& e) {
    log.error(e.what());
    return kUndesignable;
  } catch (const ConfigError& e) {
    log.error(e.what());
    return kConfigError;
  } catch (const InvalidArgument& e) {
    log.error(e.what());
    return kConfigError;
  } catch (const NumericalError& e) {
    return numerical_failure(log, e.what());
  } catch (const fs::filesystem_error& e) {
    log.error(e.what());
    return kConfigError;
  }
  return kOk;
}

}  // namespace ionfilter::cli
