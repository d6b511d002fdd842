#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "catsim/constants.hpp"
#include "catsim/csv.hpp"
#include "catsim/ensemble.hpp"
#include "catsim/fitting.hpp"
#include "catsim/fock.hpp"
#include "catsim/interferometer.hpp"
#include "catsim/spin_motion.hpp"
#include "catsim/thermometry.hpp"

#ifndef CATSIM_VERSION_STRING
#define CATSIM_VERSION_STRING "0.0.0"
#endif

namespace catsim::cli {

const char* version() { return CATSIM_VERSION_STRING; }

namespace {

using json = nlohmann::json;
using constants::pi;
using constants::two_pi;

// ---------------------------------------------------------------------------
// Strict sections: every key must be consumed before finish().

class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected a JSON object");
    j_ = j;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::optional<double> opt_number(const std::string& key) {
    if (!take(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + ": not finite");
    return d;
  }

  double number(const std::string& key, double fallback) { return opt_number(key).value_or(fallback); }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(where(key) + ": must be > 0");
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v < 0.0) throw ConfigError(where(key) + ": must be >= 0");
    return v;
  }

  std::optional<long long> opt_integer(const std::string& key) {
    if (!take(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<long long>();
  }

  int integer(const std::string& key, int fallback, long long lo, long long hi) {
    const long long v = opt_integer(key).value_or(fallback);
    if (v < lo || v > hi) {
      throw ConfigError(where(key) + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::optional<std::string> opt_string(const std::string& key) {
    if (!take(key)) return std::nullopt;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(where(key) + ": expected a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + ": expected a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<Section> child(const std::string& key) {
    if (!take(key)) return std::nullopt;
    return Section(j_.at(key), where(key));
  }

  void finish() const {
    std::vector<std::string> unknown;
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) unknown.push_back(item.key());
    }
    if (unknown.empty()) return;
    std::string msg = path_ + ": unknown key";
    msg += unknown.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", '" : "'") + unknown[i] + "'";
    throw ConfigError(msg);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  bool take(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  json j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------

struct Grid {
  double start = 0.0;
  double stop = two_pi;
  int points = 64;
  bool endpoint = false;

  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    const double denom = endpoint ? std::max(points - 1, 1) : points;
    for (int i = 0; i < points; ++i) v[i] = start + (stop - start) * i / denom;
    return v;
  }
};

struct Noise {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct Spectroscopy {
  double nbar = 0.25;
  double t_pulse = 1e-3;
  std::optional<double> rabi0;
  double start_hz = 0.0, stop_hz = 0.0;
  int points = 0;
  SpectrumOptions options;
};

struct Radial {
  double mode_radius = 22e-6;
  std::vector<double> temperatures{2e-6, 150e-6};
  double trap_depth = 0.0;
  bool anchored = true;
  double anchor_temperature = 2e-6;
  double anchor_radius = 0.9e-6;
  AveragingOptions averaging;
};

struct Fit {
  std::filesystem::path input;
  std::optional<std::array<double, 3>> initial3;
  Dataset data;
};

struct RunConfig {
  std::string kind;
  json echo;
  PhysicalParams params;
  CatProtocolConfig protocol;
  std::optional<double> alpha_request;
  Grid phi;
  std::optional<Noise> noise;
  Spectroscopy spectroscopy;
  CoolingModelParams cooling;
  double nbar_init = 3.3;
  Radial radial;
  Fit fit;
  std::filesystem::path csv_path, summary_path;
};

const std::map<std::string, std::set<std::string>> kind_sections = {
    {"fringe", {"protocol", "phi_grid", "noise"}},
    {"cat-sequence", {"protocol", "phi_grid", "noise"}},
    {"two-pulse", {"protocol", "phi_grid", "noise"}},
    {"thermal-fringe", {"protocol", "phi_grid", "radial"}},
    {"sideband-scan", {"spectroscopy"}},
    {"rsc", {"cooling"}},
    {"fit-fringe", {"protocol", "fit"}},
    {"fit-sinusoid", {"fit"}},
    {"fit-two-pulse", {"fit"}},
};

void parse_params(Section s, PhysicalParams& p, std::optional<double>& rabi) {
  p.trap_omega = two_pi * s.positive("trap_freq_hz", p.trap_omega / two_pi);
  p.radial_omega = two_pi * s.non_negative("radial_freq_hz", p.radial_omega / two_pi);
  p.drive_omega = two_pi * s.non_negative("drive_freq_hz", p.trap_omega / two_pi);
  p.eta = s.positive("eta", p.eta);
  rabi = s.opt_number("rabi_rad_per_s");
  if (rabi && *rabi < 0.0) throw ConfigError(s.where("rabi_rad_per_s") + ": must be >= 0");
  p.epsilon_override = s.opt_number("epsilon");
  p.delta_s_hz = s.positive("delta_s_hz", p.delta_s_hz);
  p.f_hf_hz = s.positive("f_hf_hz", p.f_hf_hz);
  p.mass = s.positive("mass_kg", p.mass);
  const double period = s.positive("lattice_period_nm", 410.5) * 1e-9;
  p.lattice_recoil = PhysicalParams::recoil_for_period(period, p.mass);
  p.k_eff = p.eta / p.z0();
  s.finish();
}

void parse_protocol(Section s, RunConfig& rc) {
  CatProtocolConfig& c = rc.protocol;
  c.t_drive = s.non_negative("t_drive_us", 0.45) * 1e-6;
  c.delta_M = s.number("delta_M_rad", pi / 2.0);
  c.wait_tau = s.non_negative("wait_tau_us", 0.0) * 1e-6;
  c.nbar0 = s.non_negative("nbar0", 0.25);
  c.contrast = s.number("contrast", 1.0);
  if (c.contrast < 0.0 || c.contrast > 1.0) throw ConfigError(s.where("contrast") + ": must lie in [0, 1]");
  if (const auto d = s.opt_integer("fock_dim")) {
    if (*d < 2 || *d > 2000) throw ConfigError(s.where("fock_dim") + ": must lie in [2, 2000]");
    c.fock_dim = static_cast<int>(*d);
  }
  rc.alpha_request = s.opt_number("alpha");
  if (rc.alpha_request && *rc.alpha_request < 0.0) throw ConfigError(s.where("alpha") + ": must be >= 0");
  s.finish();
}

Grid parse_grid(Section s) {
  Grid g;
  g.start = s.number("start_rad", 0.0);
  g.stop = s.number("stop_rad", two_pi);
  g.points = s.integer("points", 64, 1, 1000000);
  g.endpoint = s.boolean("endpoint", false);
  s.finish();
  return g;
}

Noise parse_noise(Section s) {
  Noise n;
  n.sigma = s.positive("sigma", 0.01);
  const auto seed = s.opt_integer("seed");
  if (!seed || *seed < 0) throw ConfigError(s.where("seed") + ": a non-negative integer seed is required");
  n.seed = static_cast<std::uint64_t>(*seed);
  s.finish();
  return n;
}

void parse_spectroscopy(Section s, RunConfig& rc) {
  Spectroscopy& sp = rc.spectroscopy;
  const double f = rc.params.trap_omega / two_pi;
  sp.nbar = s.non_negative("nbar", 0.25);
  sp.t_pulse = s.positive("t_pulse_us", 1000.0) * 1e-6;
  sp.rabi0 = s.opt_number("rabi0_rad_per_s");
  if (sp.rabi0 && !(*sp.rabi0 > 0.0)) throw ConfigError(s.where("rabi0_rad_per_s") + ": must be > 0");
  sp.start_hz = s.number("detuning_start_hz", -1.6 * f);
  sp.stop_hz = s.number("detuning_stop_hz", 1.6 * f);
  const double step_hz = 0.05 / sp.t_pulse / two_pi;
  const int fallback = static_cast<int>(std::floor((sp.stop_hz - sp.start_hz) / step_hz)) + 1;
  sp.points = s.integer("detuning_points", std::max(fallback, 2), 2, 10000000);
  sp.options.anharmonic = s.boolean("anharmonic", false);
  sp.options.lattice_recoil = rc.params.lattice_recoil;
  sp.options.od_max = s.positive("od_max", sp.options.od_max);
  if (!(sp.stop_hz > sp.start_hz)) throw ConfigError(s.where("detuning_stop_hz") + ": must exceed the start");
  s.finish();
}

void parse_cooling(Section s, RunConfig& rc) {
  CoolingModelParams& m = rc.cooling;
  rc.nbar_init = s.non_negative("nbar_init", 3.3);
  m.cycles = s.integer("cycles", 200, 0, 1000000);
  m.photons_per_cycle = s.non_negative("photons_per_cycle", m.photons_per_cycle);
  m.eta_op = s.non_negative("eta_op", m.eta_op);
  m.heating_prob_per_cycle = s.opt_number("heating_prob_per_cycle");
  m.rabi_spread = s.non_negative("rabi_spread", m.rabi_spread);
  m.pi_pulse_target_n = s.integer("pi_pulse_target_n", 1, 1, 1000);
  m.fock_dim = s.integer("fock_dim", 80, 2, 100000);
  try {
    (void)m.heating();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.where("heating_prob_per_cycle") + ": " + e.what());
  }
  s.finish();
}

void parse_radial(Section s, RunConfig& rc) {
  Radial& r = rc.radial;
  r.mode_radius = s.positive("mode_radius_um", 22.0) * 1e-6;
  r.temperatures = s.numbers("temperatures_uK", {2.0, 150.0});
  for (double& t : r.temperatures) {
    if (t < 0.0) throw ConfigError(s.where("temperatures_uK") + ": temperatures must be >= 0");
    t *= 1e-6;
  }
  const auto depth = s.opt_number("trap_depth_J");
  r.anchor_temperature = s.positive("anchor_temperature_uK", 2.0) * 1e-6;
  r.anchor_radius = s.positive("anchor_cloud_radius_um", 0.9) * 1e-6;
  if (depth) {
    if (!(*depth > 0.0)) throw ConfigError(s.where("trap_depth_J") + ": must be > 0");
    if (s.has("anchor_temperature_uK") || s.has("anchor_cloud_radius_um")) {
      throw ConfigError(s.where("trap_depth_J") + ": give either trap_depth_J or the anchor, not both");
    }
    r.trap_depth = *depth;
    r.anchored = false;
  } else {
    r.trap_depth = RadialParams::trap_depth_for(r.mode_radius, r.anchor_temperature, r.anchor_radius);
  }
  r.averaging.radial_detuning = s.boolean("radial_detuning", true);
  r.averaging.rel_tol = s.positive("rel_tol", 1e-6);
  s.finish();
}

Dataset load_dataset(const std::filesystem::path& path, std::string_view y_column) {
  if (!std::filesystem::exists(path)) throw ConfigError("fit.input_csv: no such file: " + path.string());
  try {
    return dataset_from_table(read_csv_file(path.string()), y_column);
  } catch (const std::exception& e) {
    throw ConfigError("fit.input_csv: " + std::string(e.what()));
  }
}

void parse_fit(Section s, RunConfig& rc, const std::filesystem::path& base) {
  const auto input = s.opt_string("input_csv");
  if (!input) throw ConfigError(s.where("input_csv") + ": required");
  rc.fit.input = base / *input;
  if (auto init = s.child("initial")) {
    if (rc.kind != "fit-fringe") throw ConfigError(s.where("initial") + ": only fit-fringe takes an initial guess");
    std::array<double, 3> v{};
    const auto a = init->opt_number("alpha");
    const auto c = init->opt_number("C");
    const auto f = init->opt_number("phi_f_rad");
    if (!a || !c || !f) throw ConfigError(s.where("initial") + ": needs alpha, C and phi_f_rad");
    v = {*a, *c, *f};
    init->finish();
    rc.fit.initial3 = v;
  }
  s.finish();
  rc.fit.data = load_dataset(rc.fit.input, rc.kind == "fit-two-pulse" ? "mean_n" : "p_up");
}

RunConfig parse_config(const std::filesystem::path& path, const RunOptions& options) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }

  RunConfig rc;
  rc.echo = root;
  Section top(root, "config");
  const auto kind = top.opt_string("experiment");
  if (!kind) throw ConfigError("config.experiment: required");
  const auto allowed = kind_sections.find(*kind);
  if (allowed == kind_sections.end()) throw ConfigError("config.experiment: unknown experiment '" + *kind + "'");
  rc.kind = *kind;
  for (const auto& item : root.items()) {
    const std::string& k = item.key();
    if (k == "experiment" || k == "params" || k == "output") continue;
    if (!allowed->second.count(k)) {
      throw ConfigError("config: unknown key '" + k + "' for experiment '" + rc.kind + "'");
    }
  }

  const std::filesystem::path base = options.output_dir.empty() ? path.parent_path() : options.output_dir;
  const std::filesystem::path input_base = path.parent_path();

  rc.params = PhysicalParams::lab_defaults();
  std::optional<double> rabi;
  if (auto s = top.child("params")) {
    parse_params(std::move(*s), rc.params, rabi);
  } else {
    rc.params.k_eff = rc.params.eta / rc.params.z0();
  }
  if (auto s = top.child("protocol")) parse_protocol(std::move(*s), rc);
  if (auto s = top.child("phi_grid")) rc.phi = parse_grid(std::move(*s));
  if (auto s = top.child("noise")) rc.noise = parse_noise(std::move(*s));
  if (auto s = top.child("spectroscopy")) {
    parse_spectroscopy(std::move(*s), rc);
  } else if (rc.kind == "sideband-scan") {
    parse_spectroscopy(Section(json::object(), "config.spectroscopy"), rc);
  }
  if (auto s = top.child("cooling")) parse_cooling(std::move(*s), rc);
  if (auto s = top.child("radial")) {
    parse_radial(std::move(*s), rc);
  } else if (rc.kind == "thermal-fringe") {
    parse_radial(Section(json::object(), "config.radial"), rc);
  }
  if (auto s = top.child("fit")) {
    parse_fit(std::move(*s), rc, input_base);
  } else if (rc.kind.rfind("fit-", 0) == 0) {
    throw ConfigError("config.fit: required for " + rc.kind);
  }

  const std::string stem = path.stem().string();
  rc.csv_path = base / (stem + ".csv");
  rc.summary_path = base / (stem + ".summary.json");
  if (auto s = top.child("output")) {
    if (auto c = s->opt_string("csv")) rc.csv_path = base / *c;
    if (auto j = s->opt_string("summary")) rc.summary_path = base / *j;
    s->finish();
  }
  top.finish();

  // Rabi frequency: explicit or derived from a requested |alpha|, else the built-in default.
  if (rabi && rc.alpha_request) throw ConfigError("config: give params.rabi_rad_per_s or protocol.alpha, not both");
  if (rabi) rc.params.rabi = *rabi;
  if (rc.alpha_request) {
    const double unit = std::abs(alpha_of_t(rc.params.eta, 1.0, rc.params.delta(), rc.protocol.t_drive));
    if (*rc.alpha_request > 0.0 && !(unit > 0.0)) {
      throw ConfigError("protocol.alpha: unreachable with t_drive_us = 0 or a closed detuned loop");
    }
    rc.params.rabi = *rc.alpha_request > 0.0 ? *rc.alpha_request / unit : 0.0;
  }
  rc.protocol.params = rc.params;
  return rc;
}

// ---------------------------------------------------------------------------

double alpha_mag(const RunConfig& rc) {
  return std::abs(alpha_of_t(rc.params.eta, rc.params.rabi, rc.params.delta(), rc.protocol.t_drive));
}

void add_noise(CsvTable& t, const std::optional<Noise>& noise) {
  if (!noise) return;
  std::mt19937_64 rng(noise->seed);
  std::normal_distribution<double> dist(0.0, noise->sigma);
  for (auto& row : t.rows) {
    row[1] += dist(rng);
    row[2] = noise->sigma;
  }
}

void require_finite(const CsvTable& t) {
  for (const auto& row : t.rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw NumericalError("non-finite value in the output table");
    }
  }
}

json fit_json(const FitResult& f) {
  json j;
  json params = json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    params[f.names[i]] = {{"value", f.values[k]}, {"sigma", std::sqrt(std::max(f.covariance(k, k), 0.0))}};
  }
  j["parameters"] = params;
  json cov = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) {
      const double v = f.covariance(r, c);
      row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    }
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["residual_norm"] = f.residual_norm;
  j["converged"] = f.converged;
  j["status"] = to_string(f.status);
  j["iterations"] = f.iterations;
  j["extras"] = f.extras;
  return j;
}

struct Outcome {
  CsvTable table;
  json derived = json::object();
  json results = json::object();
  bool numerical_failure = false;
  std::string failure;
};

CsvTable phi_table(const std::vector<double>& phis, const char* y, const std::function<double(double)>& f) {
  CsvTable t{{"phi_rad", y, "sigma"}, {}};
  for (double phi : phis) t.rows.push_back({phi, f(phi), 1.0});
  return t;
}

Outcome run_fringe(const RunConfig& rc) {
  Outcome o;
  const double a = alpha_mag(rc);
  const double phi_f = rc.params.drive_omega * rc.protocol.wait_tau;
  const double eps = rc.params.epsilon();
  o.table = phi_table(rc.phi.values(), "p_up", [&](double phi) {
    return fringe_model(a, rc.protocol.contrast, phi_f, eps, rc.protocol.nbar0, phi, rc.protocol.delta_M);
  });
  add_noise(o.table, rc.noise);
  o.derived["alpha_abs"] = a;
  o.derived["phi_f_rad"] = phi_f;
  return o;
}

Outcome run_cat(const RunConfig& rc) {
  Outcome o;
  CatProtocolConfig cfg = rc.protocol;
  bool warn = false;
  double phi_f = 0.0;
  o.table = phi_table(rc.phi.values(), "p_up", [&](double phi) {
    cfg.phi = phi;
    const CatResult r = run_cat_sequence(cfg);
    warn = warn || r.truncation_warning;
    phi_f = r.phi_f;
    return apply_contrast(r.p_up, cfg.contrast);
  });
  add_noise(o.table, rc.noise);
  o.derived["alpha_abs"] = alpha_mag(rc);
  o.derived["phi_f_rad"] = phi_f;
  o.derived["fock_dim"] = protocol_fock_dim(cfg);
  o.results["truncation_warning"] = warn;
  return o;
}

Outcome run_two_pulse(const RunConfig& rc) {
  Outcome o;
  const complex alpha = alpha_of_t(rc.params.eta, rc.params.rabi, rc.params.delta(), rc.protocol.t_drive);
  const int dim = rc.protocol.fock_dim.value_or(protocol_fock_dim(rc.protocol));
  const FockSpace space(dim);
  const MixtureState thermal = thermal_mixture(rc.protocol.nbar0, space);
  const Operator D1 = displacement_operator(alpha, space);
  o.table = phi_table(rc.phi.values(), "mean_n", [&](double phi) {
    const Operator D2 = displacement_operator(alpha * std::polar(1.0, phi), space);
    return mean_phonon(thermal.map([&](const StateVector& s) { return D2.apply(D1.apply(s)); }));
  });
  add_noise(o.table, rc.noise);
  o.derived["alpha_abs"] = std::abs(alpha);
  o.derived["fock_dim"] = dim;
  return o;
}

Outcome run_thermal(const RunConfig& rc) {
  Outcome o;
  const Radial& r = rc.radial;
  o.table.header = {"temperature_uK", "phi_rad", "p_up"};
  json w_a = json::array();
  bool converged = true;
  const double phi_f = rc.params.drive_omega * rc.protocol.wait_tau;
  AveragingOptions opts = r.averaging;
  opts.phi_f = phi_f;
  for (double T : r.temperatures) {
    const RadialParams rp{r.mode_radius, T, r.trap_depth};
    w_a.push_back(rp.cloud_radius() * 1e6);
    for (double phi : rc.phi.values()) {
      const AveragedFringe f =
          averaged_fringe(rc.params, rp, rc.protocol.t_drive, rc.protocol.contrast, rc.protocol.nbar0, phi,
                          rc.protocol.delta_M, opts);
      converged = converged && f.converged;
      o.table.rows.push_back({T * 1e6, phi, f.p_up});
    }
  }
  o.derived["alpha_abs"] = alpha_mag(rc);
  o.derived["trap_depth_J"] = r.trap_depth;
  o.derived["temperatures_uK"] = [&] {
    json t = json::array();
    for (double T : r.temperatures) t.push_back(T * 1e6);
    return t;
  }();
  o.derived["w_a_um"] = w_a;
  o.results["quadrature_converged"] = converged;
  if (!converged) {
    o.numerical_failure = true;
    o.failure = "radial quadrature did not converge";
  }
  return o;
}

Outcome run_sideband(const RunConfig& rc) {
  Outcome o;
  const Spectroscopy& sp = rc.spectroscopy;
  const double rabi0 = sp.rabi0.value_or(pi / (2.0 * rc.params.eta * sp.t_pulse));
  std::vector<double> grid(static_cast<std::size_t>(sp.points));
  for (int i = 0; i < sp.points; ++i) {
    grid[i] = two_pi * (sp.start_hz + (sp.stop_hz - sp.start_hz) * i / (sp.points - 1));
  }
  const auto spectrum =
      sideband_spectrum(sp.nbar, rabi0, rc.params.eta, sp.t_pulse, rc.params.trap_omega, grid, sp.options);
  o.table = spectrum_table(spectrum);
  o.derived["rabi0_rad_per_s"] = rabi0;
  o.derived["anharmonic_shift_fraction"] = rc.params.lattice_recoil / rc.params.trap_omega;
  try {
    const ThermometryResult t = extract_nbar(spectrum, rc.params.trap_omega);
    o.results["red_area_rad_per_s"] = t.red_area;
    o.results["blue_area_rad_per_s"] = t.blue_area;
    o.results["area_ratio"] = t.ratio;
    o.results["saturated"] = t.saturated;
    o.results["nbar_extracted"] = t.saturated ? json(nullptr) : json(t.nbar);
  } catch (const std::domain_error& e) {
    o.numerical_failure = true;
    o.failure = e.what();
  }
  return o;
}

Outcome run_rsc(const RunConfig& rc) {
  Outcome o;
  const auto traj = rsc_simulate(rc.nbar_init, rc.cooling, rc.params.eta, 1.0);
  o.table.header = {"cycle", "mean_n", "p0"};
  int reached = -1;
  for (const auto& step : traj) {
    o.table.rows.push_back({static_cast<double>(step.cycle), step.mean_n, step.populations[0]});
    if (reached < 0 && step.mean_n <= 0.5) reached = step.cycle;
  }
  o.derived["heating_prob_per_cycle"] = rc.cooling.heating();
  o.results["final_mean_n"] = traj.back().mean_n;
  o.results["first_cycle_mean_n_le_0p5"] = reached >= 0 ? json(reached) : json(nullptr);
  return o;
}

void check_fit(Outcome& o, const FitResult& f) {
  o.results["fit"] = fit_json(f);
  if (!f.converged) {
    o.numerical_failure = true;
    o.failure = std::string("fit did not converge (") + to_string(f.status) + ")";
  }
}

Outcome run_fit_fringe(const RunConfig& rc) {
  Outcome o;
  const double eps = rc.params.epsilon();
  const double a0 = rc.params.eta * rc.params.rabi * rc.protocol.t_drive / 2.0;
  const auto init = rc.fit.initial3.value_or(
      seed_residual_fringe(rc.fit.data, eps, rc.protocol.nbar0, rc.protocol.delta_M, a0));
  const FitResult f = fit_residual_fringe(rc.fit.data, eps, rc.protocol.nbar0, rc.protocol.delta_M, init);
  o.table.header = {"phi_rad", "p_up", "p_up_fit", "residual"};
  for (const auto& row : rc.fit.data.rows) {
    const double m = fringe_model(f.values[0], f.values[1], f.values[2], eps, rc.protocol.nbar0, row.x,
                                  rc.protocol.delta_M);
    o.table.rows.push_back({row.x, row.y, m, row.y - m});
  }
  o.derived["alpha_seed"] = a0;
  o.derived["initial"] = {{"alpha", init[0]}, {"C", init[1]}, {"phi_f_rad", init[2]}};
  check_fit(o, f);
  return o;
}

Outcome run_fit_sinusoid(const RunConfig& rc) {
  Outcome o;
  const FitResult f = fit_sinusoid(rc.fit.data);
  o.table.header = {"phi_rad", "p_up", "p_up_fit", "residual"};
  for (const auto& row : rc.fit.data.rows) {
    const double m = f.values[2] + f.values[0] * std::cos(row.x + f.values[1]);
    o.table.rows.push_back({row.x, row.y, m, row.y - m});
  }
  check_fit(o, f);
  return o;
}

Outcome run_fit_two_pulse(const RunConfig& rc) {
  Outcome o;
  const FitResult f = fit_two_pulse(rc.fit.data);
  o.table.header = {"phi_rad", "mean_n", "mean_n_fit", "residual"};
  for (const auto& row : rc.fit.data.rows) {
    const double m = f.values[0] + 2.0 * f.values[1] * f.values[1] * (1.0 + std::cos(row.x));
    o.table.rows.push_back({row.x, row.y, m, row.y - m});
  }
  check_fit(o, f);
  return o;
}

Outcome dispatch(const RunConfig& rc) {
  if (rc.kind == "fringe") return run_fringe(rc);
  if (rc.kind == "cat-sequence") return run_cat(rc);
  if (rc.kind == "two-pulse") return run_two_pulse(rc);
  if (rc.kind == "thermal-fringe") return run_thermal(rc);
  if (rc.kind == "sideband-scan") return run_sideband(rc);
  if (rc.kind == "rsc") return run_rsc(rc);
  if (rc.kind == "fit-fringe") return run_fit_fringe(rc);
  if (rc.kind == "fit-sinusoid") return run_fit_sinusoid(rc);
  return run_fit_two_pulse(rc);
}

json common_derived(const RunConfig& rc) {
  const PhysicalParams& p = rc.params;
  return {
      {"z0_m", p.z0()},
      {"epsilon_model", p.epsilon_model()},
      {"epsilon_used", p.epsilon()},
      {"delta_rad_per_s", p.delta()},
      {"rabi_rad_per_s", p.rabi},
      {"k_eff_per_m", p.k_eff},
      {"lattice_recoil_rad_per_s", p.lattice_recoil},
      {"separation_at_alpha_m", wavepacket_separation(alpha_mag(rc), p)},
  };
}

}  // namespace

int run_config_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err) {
  RunConfig rc;
  try {
    rc = parse_config(config_path, options);
  } catch (const ConfigError& e) {
    err << "catsim: config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "catsim: config error: " << e.what() << '\n';
    return exit_config;
  }

  Outcome o;
  try {
    o = dispatch(rc);
    require_finite(o.table);
  } catch (const std::invalid_argument& e) {
    err << "catsim: invalid input: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "catsim: numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }

  json summary;
  summary["catsim_version"] = version();
  summary["experiment"] = rc.kind;
  summary["inputs"] = rc.echo;
  json derived = common_derived(rc);
  derived.update(o.derived);
  summary["derived"] = derived;
  summary["results"] = o.results;
  summary["outputs"] = {{"csv", rc.csv_path.filename().string()}, {"rows", o.table.rows.size()}};
  summary["status"] = o.numerical_failure ? "numerical_failure" : "ok";

  try {
    for (const auto& path : {rc.csv_path, rc.summary_path}) {
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    }
    write_csv_file(rc.csv_path.string(), o.table);
    std::ofstream os(rc.summary_path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + rc.summary_path.string() + " for writing");
    os << summary.dump(2) << '\n';
    if (!os) throw std::runtime_error("write to " + rc.summary_path.string() + " failed");
  } catch (const std::exception& e) {
    err << "catsim: output error: " << e.what() << '\n';
    return exit_config;
  }

  if (o.numerical_failure) {
    err << "catsim: numerical failure: " << o.failure << '\n';
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace catsim::cli
