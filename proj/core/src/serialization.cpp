#include "ionfilter/serialization.hpp"

#include <cstdio>
#include <ostream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace ionfilter {
namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

// Reads one JSON object and remembers which keys were used, so that anything
// left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where() + "expected an object");
  }

  template <class T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    const auto it = object_.find(key);
    if (it == object_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where() + "'" + key + "' has the wrong type (" + it->type_name() + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::string path_of(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : object_.items())
      if (!seen_.count(key)) throw ConfigError(where() + "unknown key '" + key + "'");
  }

 private:
  std::string where() const { return "config" + (path_.empty() ? "" : " at '" + path_ + "'") + ": "; }

  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

AngularKind parse_angular(const std::string& s) {
  if (s == "dipole") return AngularKind::Dipole;
  if (s == "isotropic") return AngularKind::Isotropic;
  throw ConfigError("config: emission.angular must be 'dipole' or 'isotropic', got '" + s + "'");
}

const char* angular_name(AngularKind k) { return k == AngularKind::Dipole ? "dipole" : "isotropic"; }

Level parse_level(const std::string& s) {
  if (s == "ground") return Level::Ground;
  if (s == "excited") return Level::Excited;
  throw ConfigError("config: initial.level must be 'ground' or 'excited', got '" + s + "'");
}

void read_drive(const json& node, const std::string& path, LaserDrive& drive) {
  ObjectReader r(node, path);
  double rabi = drive.rabi.real();
  double phase = std::arg(drive.rabi);
  r.read("order", drive.sideband_order);
  r.read("eta", drive.lamb_dicke);
  r.read("rabi", rabi);
  r.read("phase", phase);
  r.finish();
  drive.rabi = std::polar(rabi, phase);
}

ordered drive_json(const LaserDrive& d) {
  return {{"order", d.sideband_order},
          {"eta", d.lamb_dicke},
          {"rabi", std::abs(d.rabi)},
          {"phase", std::arg(d.rabi)}};
}

void apply_json(const json& doc, RunConfig& cfg) {
  ObjectReader root(doc, "");
  root.read("levels", cfg.levels);
  root.read("seed", cfg.seed);

  if (const json* drives = root.child("drives")) {
    ObjectReader r(*drives, "drives");
    if (const json* j = r.child("j")) read_drive(*j, "drives.j", cfg.drives.drive_j);
    if (const json* m = r.child("m")) read_drive(*m, "drives.m", cfg.drives.drive_m);
    r.finish();
  }

  if (const json* em = root.child("emission")) {
    ObjectReader r(*em, "emission");
    std::string angular = angular_name(cfg.emission.angular);
    r.read("gamma", cfg.emission.gamma);
    r.read("eta_e", cfg.emission.eta_e);
    r.read("angular", angular);
    r.read("quadrature_order", cfg.emission.quadrature_order);
    r.finish();
    cfg.emission.angular = parse_angular(angular);
  }

  if (const json* init = root.child("initial")) {
    ObjectReader r(*init, "initial");
    std::string kind = "thermal";
    std::string level = "ground";
    double alpha_re = cfg.initial.alpha.real();
    double alpha_im = cfg.initial.alpha.imag();
    r.read("kind", kind);
    r.read("nbar", cfg.initial.nbar);
    r.read("q", cfg.initial.q);
    r.read("alpha_re", alpha_re);
    r.read("alpha_im", alpha_im);
    r.read("level", level);
    r.finish();
    if (kind == "thermal") {
      cfg.initial.kind = InitialStateSpec::Kind::Thermal;
    } else if (kind == "number") {
      cfg.initial.kind = InitialStateSpec::Kind::Number;
    } else if (kind == "coherent") {
      cfg.initial.kind = InitialStateSpec::Kind::Coherent;
    } else {
      throw ConfigError("config: initial.kind must be 'thermal', 'number' or 'coherent', got '" + kind + "'");
    }
    cfg.initial.alpha = Complex(alpha_re, alpha_im);
    cfg.initial.level = parse_level(level);
  }

  if (const json* ev = root.child("evolution")) {
    ObjectReader r(*ev, "evolution");
    EvolutionConfig& e = cfg.evolution;
    r.read("t_final", e.t_final);
    r.read("rel_tol", e.rel_tol);
    r.read("abs_tol", e.abs_tol);
    r.read("max_step", e.max_step);
    r.read("initial_step", e.initial_step);
    r.read("sample_stride", e.sample_stride);
    r.read("stop_at_steady", e.stop_at_steady);
    r.read("steady_rhs_tol", e.steady_rhs_tol);
    r.read("steady_fluorescence_tol", e.steady_fluorescence_tol);
    r.read("steady_samples", e.steady_samples);
    r.finish();
  }

  std::string target = cfg.target == TargetKind::Dark ? "dark" : "none";
  root.read("target", target);
  if (target == "dark") {
    cfg.target = TargetKind::Dark;
  } else if (target == "none") {
    cfg.target = TargetKind::None;
  } else {
    throw ConfigError("config: target must be 'dark' or 'none', got '" + target + "'");
  }

  if (const json* out = root.child("output")) {
    ObjectReader r(*out, "output");
    r.read("dir", cfg.output_dir);
    r.read("prefix", cfg.output_prefix);
    r.finish();
  }
  root.finish();
}

json parse_document(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": malformed JSON: " + e.what());
  }
}

}  // namespace

DensityMatrix make_initial_state(const InitialStateSpec& spec, FockSpace space) {
  Matrix vib;
  switch (spec.kind) {
    case InitialStateSpec::Kind::Thermal:
      vib = thermal_state(spec.nbar, space).matrix();
      break;
    case InitialStateSpec::Kind::Number:
      vib = number_state(spec.q, space).projector().matrix();
      break;
    case InitialStateSpec::Kind::Coherent:
      vib = coherent_state(spec.alpha, space).projector().matrix();
      break;
  }
  return DensityMatrix(embed(vib, spec.level));
}

void RunConfig::validate() const {
  try {
    const FockSpace s(levels);
    drives.validate();
    emission.validate();
    evolution.validate();
    if (levels <= drives.j())
      throw InvalidArgument("truncation below sideband order: " + std::to_string(levels) +
                            " levels cannot carry a sideband of order " + std::to_string(drives.j()));
    make_initial_state(initial, s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.drives.drive_j = {1, 0.2, 0.5};
  cfg.drives.drive_m = {0, 0.2, 1.0};
  cfg.emission.eta_e = 1.0;
  cfg.evolution.t_final = 2000.0;
  cfg.evolution.sample_stride = 10.0;
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  return parse_run_config(json_text, default_run_config());
}

RunConfig parse_run_config(const std::string& json_text, const RunConfig& base) {
  RunConfig cfg = base;
  apply_json(parse_document(json_text, "config"), cfg);
  cfg.validate();
  return cfg;
}

std::string to_json(const RunConfig& c) {
  const char* kind = c.initial.kind == InitialStateSpec::Kind::Thermal  ? "thermal"
                     : c.initial.kind == InitialStateSpec::Kind::Number ? "number"
                                                                         : "coherent";
  ordered doc = {
      {"levels", c.levels},
      {"drives", {{"j", drive_json(c.drives.drive_j)}, {"m", drive_json(c.drives.drive_m)}}},
      {"emission",
       {{"gamma", c.emission.gamma},
        {"eta_e", c.emission.eta_e},
        {"angular", angular_name(c.emission.angular)},
        {"quadrature_order", c.emission.quadrature_order}}},
      {"initial",
       {{"kind", kind},
        {"nbar", c.initial.nbar},
        {"q", c.initial.q},
        {"alpha_re", c.initial.alpha.real()},
        {"alpha_im", c.initial.alpha.imag()},
        {"level", c.initial.level == Level::Ground ? "ground" : "excited"}}},
      {"evolution",
       {{"t_final", c.evolution.t_final},
        {"rel_tol", c.evolution.rel_tol},
        {"abs_tol", c.evolution.abs_tol},
        {"max_step", c.evolution.max_step},
        {"initial_step", c.evolution.initial_step},
        {"sample_stride", c.evolution.sample_stride},
        {"stop_at_steady", c.evolution.stop_at_steady},
        {"steady_rhs_tol", c.evolution.steady_rhs_tol},
        {"steady_fluorescence_tol", c.evolution.steady_fluorescence_tol},
        {"steady_samples", c.evolution.steady_samples}}},
      {"target", c.target == TargetKind::Dark ? "dark" : "none"},
      {"output", {{"dir", c.output_dir}, {"prefix", c.output_prefix}}},
      {"seed", c.seed}};
  return doc.dump(2);
}

std::string dark_state_json(const DarkStateResult& s) {
  ordered re = ordered::array();
  ordered im = ordered::array();
  for (Eigen::Index k = 0; k < s.coefficients.size(); ++k) {
    re.push_back(s.coefficients(k).real());
    im.push_back(s.coefficients(k).imag());
  }
  ordered doc = {{"n", s.coefficients.size()},
                 {"re", re},
                 {"im", im},
                 {"support", {s.support_min, s.support_max}},
                 {"truncation_limited", s.truncation_limited},
                 {"normalization", s.normalization},
                 {"converged", s.converged},
                 {"tail_weight", s.tail_weight},
                 {"warnings", s.warnings}};
  return doc.dump(2);
}

DarkStateResult parse_dark_state_json(const std::string& json_text) {
  const json doc = parse_document(json_text, "state");
  DarkStateResult s;
  try {
    const auto n = doc.at("n").get<Eigen::Index>();
    const auto re = doc.at("re").get<std::vector<double>>();
    const auto im = doc.at("im").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(re.size()) != n || static_cast<Eigen::Index>(im.size()) != n)
      throw ConfigError("state: re/im length does not match n");
    s.coefficients.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) s.coefficients(k) = Complex(re[k], im[k]);
    const auto support = doc.at("support").get<std::vector<int>>();
    if (support.size() != 2) throw ConfigError("state: support must have two entries");
    s.support_min = support[0];
    s.support_max = support[1];
    s.truncation_limited = doc.at("truncation_limited").get<bool>();
    s.normalization = doc.at("normalization").get<double>();
    s.converged = doc.at("converged").get<bool>();
    s.tail_weight = doc.at("tail_weight").get<double>();
    s.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("state: ") + e.what());
  }
  return s;
}

std::string density_json(const Matrix& rho, FockSpace space, double time) {
  ordered re = ordered::array();
  ordered im = ordered::array();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    ordered rr = ordered::array();
    ordered ir = ordered::array();
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      rr.push_back(rho(r, c).real());
      ir.push_back(rho(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  ordered doc = {{"levels", space.levels()}, {"dim", rho.rows()}, {"time", time}, {"re", re}, {"im", im}};
  return doc.dump(2);
}

Matrix parse_density_json(const std::string& json_text) {
  const json doc = parse_document(json_text, "density");
  try {
    const auto dim = doc.at("dim").get<Eigen::Index>();
    const auto re = doc.at("re").get<std::vector<std::vector<double>>>();
    const auto im = doc.at("im").get<std::vector<std::vector<double>>>();
    if (static_cast<Eigen::Index>(re.size()) != dim || static_cast<Eigen::Index>(im.size()) != dim)
      throw ConfigError("density: row count does not match dim");
    Matrix rho(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (static_cast<Eigen::Index>(re[r].size()) != dim || static_cast<Eigen::Index>(im[r].size()) != dim)
        throw ConfigError("density: column count does not match dim");
      for (Eigen::Index c = 0; c < dim; ++c) rho(r, c) = Complex(re[r][c], im[r][c]);
    }
    return rho;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("density: ") + e.what());
  }
}

std::string format_csv_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, FockSpace space) {
  out << "time,excited_population,mean_number,purity,fluorescence,fidelity";
  for (int n = 0; n < space.levels(); ++n) out << ",p_" << n;
  out << '\n';
  for (const ObservableRecord& r : trajectory.observables) {
    out << format_csv_number(r.time) << ',' << format_csv_number(r.excited_population) << ','
        << format_csv_number(r.mean_number) << ',' << format_csv_number(r.purity) << ','
        << format_csv_number(r.fluorescence) << ',';
    if (r.fidelity) out << format_csv_number(*r.fidelity);
    for (Eigen::Index n = 0; n < r.fock_populations.size(); ++n)
      out << ',' << format_csv_number(r.fock_populations(n));
    out << '\n';
  }
}

}  // namespace ionfilter
