#include "aiqm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "aiqm/errors.hpp"
#include "json.hpp"

#ifndef AIQM_VERSION
#define AIQM_VERSION "0.0.0"
#endif

namespace aiqm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
  return v;
}

std::string mode_label(SimulationMode m) { return std::string(to_string(m)); }

struct PresetInfo {
  const char* name;
  const char* description;
};

const PresetInfo kPresets[] = {
    {"fig2-panels", "Ramsey with squeezed input: <Jz>, dJz and precision vs delta*t_s (full, bare, ideal)"},
    {"fig2-timesweep", "precision vs signal time chi*t_s in [0.01, 0.1] (full, ideal, bare)"},
    {"fig2-chisweep", "precision vs chi over two decades with omega_m = 2pi*20*N*chi (full, effective, ideal, bare)"},
    {"fig3-omega", "convergence of the driven result as omega_m/(2 pi N chi) grows (full vs ideal)"},
    {"fig3-ratio", "robustness window in Omega/omega_m with the in-phase/quadrature alternation (ideal)"},
    {"fig3-alpha", "robustness window in the second-block phase alpha/pi (ideal)"},
    {"fig4-compare", "full-stage protocol vs N at omega_m = 2pi*100*N*chi (ideal, full, bare)"},
    {"fig4-scaling", "full-stage precision vs N with a power-law fit (ideal)"},
    {"fig4-noise", "full-stage precision vs detection noise sigma in [0, 2 sqrt(N)] (ideal)"},
    {"custom-sweep", "user-defined sweep; defaults to a Ramsey run in ideal mode"},
};

const std::vector<std::string> kAxes = {"N",          "chi",           "delta",       "delta_ts",
                                        "t_s",        "chi_t_en",      "omega_m_factor", "drive_ratio",
                                        "alpha2_over_pi", "block_periods", "steps_per_period", "noise_sigma",
                                        "t_en",       "t_re"};

std::string axis_unit(const std::string& axis) {
  if (axis == "chi" || axis == "delta") return "rad/time";
  if (axis == "t_s" || axis == "t_en" || axis == "t_re") return "time";
  if (axis == "delta_ts" || axis == "chi_t_en") return "rad";
  if (axis == "noise_sigma") return "Jz quanta";
  return "";
}

// ---------------------------------------------------------------------------
// JSON reading with diagnostics
// ---------------------------------------------------------------------------

struct Reader {
  std::vector<Diagnostic>& diags;

  void bad(const std::string& field, const std::string& reason) { diags.push_back({field, reason}); }

  void number(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) return bad(path, "expected a number");
    out = v.get<double>();
  }

  void optional_number(const json& obj, const char* key, const std::string& path, std::optional<double>& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number()) return bad(path, "expected a number or null");
    out = v.get<double>();
  }

  void integer(const json& obj, const char* key, const std::string& path, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return bad(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < -1000000000LL || x > 1000000000LL) return bad(path, "integer out of range");
    out = static_cast<int>(x);
  }

  void boolean(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) return bad(path, "expected true or false");
    out = v.get<bool>();
  }

  bool string(const json& obj, const char* key, const std::string& path, std::string& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      bad(path, "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  void unknown_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
      if (!ok) bad(prefix.empty() ? it.key() : prefix + "." + it.key(), "unknown key");
    }
  }
};

void read_physics(Reader& r, const json& j, PhysicsConfig& p) {
  if (!j.is_object()) return r.bad("physics", "expected an object");
  r.unknown_keys(j, "physics",
                 {"N", "chi", "delta", "t_s", "chi_t_en", "omega_m_factor", "drive_ratio", "alpha2_over_pi",
                  "block_periods", "steps_per_period", "t_en", "t_re", "prep", "snap_signal_time", "noise_sigma",
                  "fd_scale"});
  r.integer(j, "N", "physics.N", p.n_particles);
  r.number(j, "chi", "physics.chi", p.chi);
  r.number(j, "delta", "physics.delta", p.delta);
  r.number(j, "t_s", "physics.t_s", p.t_s);
  r.number(j, "chi_t_en", "physics.chi_t_en", p.chi_t_en);
  r.number(j, "omega_m_factor", "physics.omega_m_factor", p.omega_m_factor);
  r.optional_number(j, "drive_ratio", "physics.drive_ratio", p.drive_ratio);
  r.number(j, "alpha2_over_pi", "physics.alpha2_over_pi", p.alpha2_over_pi);
  r.integer(j, "block_periods", "physics.block_periods", p.block_periods);
  r.integer(j, "steps_per_period", "physics.steps_per_period", p.steps_per_period);
  r.optional_number(j, "t_en", "physics.t_en", p.t_en);
  r.optional_number(j, "t_re", "physics.t_re", p.t_re);
  std::string prep;
  if (r.string(j, "prep", "physics.prep", prep)) {
    if (prep == "in-phase") {
      p.prep = PrepConvention::InPhase;
    } else if (prep == "quadrature") {
      p.prep = PrepConvention::Quadrature;
    } else {
      r.bad("physics.prep", "expected \"in-phase\" or \"quadrature\"");
    }
  }
  r.boolean(j, "snap_signal_time", "physics.snap_signal_time", p.snap_signal_time);
  r.number(j, "noise_sigma", "physics.noise_sigma", p.noise_sigma);
  r.number(j, "fd_scale", "physics.fd_scale", p.fd_scale);
}

void read_sweep(Reader& r, const json& j, SweepConfig& s) {
  if (!j.is_object()) return r.bad("sweep", "expected an object");
  r.unknown_keys(j, "sweep", {"axis", "values", "range"});
  r.string(j, "axis", "sweep.axis", s.axis);
  if (j.contains("values") && j.contains("range")) r.bad("sweep", "give either values or range, not both");
  if (j.contains("values")) {
    const json& v = j.at("values");
    if (!v.is_array()) return r.bad("sweep.values", "expected an array of numbers");
    s.values.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        r.bad("sweep.values[" + std::to_string(i) + "]", "expected a number");
        continue;
      }
      s.values.push_back(v[i].get<double>());
    }
  } else if (j.contains("range")) {
    const json& g = j.at("range");
    if (!g.is_object()) return r.bad("sweep.range", "expected {start, stop, count}");
    r.unknown_keys(g, "sweep.range", {"start", "stop", "count"});
    double start = 0.0, stop = 0.0;
    int count = 0;
    if (!g.contains("start") || !g.contains("stop") || !g.contains("count")) {
      return r.bad("sweep.range", "needs start, stop and count");
    }
    r.number(g, "start", "sweep.range.start", start);
    r.number(g, "stop", "sweep.range.stop", stop);
    r.integer(g, "count", "sweep.range.count", count);
    if (count < 1) return r.bad("sweep.range.count", "must be >= 1");
    if (count > 100000) return r.bad("sweep.range.count", "must be <= 100000");
    s.values = linspace(start, stop, count);
  }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool needs_drive(const std::vector<SimulationMode>& modes) {
  return std::any_of(modes.begin(), modes.end(), [](SimulationMode m) { return m != SimulationMode::Bare; });
}

void check_physics(const PhysicsConfig& p, PipelineKind pipeline, const std::vector<SimulationMode>& modes,
                   std::vector<Diagnostic>& d) {
  auto bad = [&](const char* field, const std::string& reason) { d.push_back({field, reason}); };
  auto finite = [](double x) { return std::isfinite(x); };
  const int min_n = pipeline == PipelineKind::Ramsey ? 3 : 1;
  if (p.n_particles < min_n) {
    bad("physics.N", "must be >= " + std::to_string(min_n) + ", got " + std::to_string(p.n_particles));
  } else if (p.n_particles > 4000) {
    bad("physics.N", "must be <= 4000 (dense Dicke-space matrices)");
  }
  const bool chi_may_vanish = pipeline == PipelineKind::Ramsey && !needs_drive(modes);
  if (!finite(p.chi) || p.chi < 0.0 || (!chi_may_vanish && p.chi == 0.0)) {
    bad("physics.chi", chi_may_vanish ? "must be >= 0" : "must be > 0");
  }
  if (!finite(p.delta)) bad("physics.delta", "must be finite");
  if (!finite(p.t_s) || !(p.t_s > 0.0)) bad("physics.t_s", "must be > 0");
  if (pipeline == PipelineKind::Ramsey && (!finite(p.chi_t_en) || !(p.chi_t_en > 0.0) || p.chi_t_en >= 0.25 * kPi)) {
    bad("physics.chi_t_en", "must lie in (0, pi/4)");
  }
  if (!finite(p.omega_m_factor) || !(p.omega_m_factor > 0.0)) bad("physics.omega_m_factor", "must be > 0");
  if (p.drive_ratio && (!finite(*p.drive_ratio) || !(*p.drive_ratio > 0.0))) {
    bad("physics.drive_ratio", "must be > 0 (or null for the L0 = -1/3 ratio)");
  }
  if (!finite(p.alpha2_over_pi)) bad("physics.alpha2_over_pi", "must be finite");
  if (p.block_periods < 1) bad("physics.block_periods", "must be >= 1");
  if (p.steps_per_period < 16) bad("physics.steps_per_period", "must be >= 16");
  if (p.t_en && (!finite(*p.t_en) || *p.t_en < 0.0)) bad("physics.t_en", "must be >= 0");
  if (p.t_re && (!finite(*p.t_re) || *p.t_re < 0.0)) bad("physics.t_re", "must be >= 0");
  if (!finite(p.noise_sigma) || p.noise_sigma < 0.0) bad("physics.noise_sigma", "must be >= 0");
  if (!finite(p.fd_scale) || !(p.fd_scale > 0.0)) bad("physics.fd_scale", "must be > 0");
  if (!d.empty()) return;

  const bool scheduled = std::any_of(modes.begin(), modes.end(), [](SimulationMode m) {
    return m == SimulationMode::FullDrive || m == SimulationMode::Effective;
  });
  if (scheduled && !p.snap_signal_time && p.chi > 0.0) {
    const double period = 1.0 / (p.omega_m_factor * p.n_particles * p.chi);
    try {
      (void)AiqmSchedule::from_signal_time(p.t_s, period, p.block_periods);
    } catch (const ScheduleError& e) {
      bad("physics.t_s", std::string(e.what()) + "; set physics.snap_signal_time to round it");
    }
  }
  if (pipeline == PipelineKind::FullStage && needs_drive(modes) && p.drive_ratio) {
    DriveParams dp;
    dp.omega_m = 1.0;
    dp.omega = *p.drive_ratio;
    if (!condition_holds(dp)) bad("physics.drive_ratio", "the full-stage protocol needs L0 = -1/3; leave it null");
  }
}

ordered_json physics_json(const PhysicsConfig& p) {
  ordered_json j;
  j["N"] = p.n_particles;
  j["chi"] = p.chi;
  j["delta"] = p.delta;
  j["t_s"] = p.t_s;
  j["chi_t_en"] = p.chi_t_en;
  j["omega_m_factor"] = p.omega_m_factor;
  j["drive_ratio"] = p.drive_ratio ? ordered_json(*p.drive_ratio) : ordered_json(nullptr);
  j["alpha2_over_pi"] = p.alpha2_over_pi;
  j["block_periods"] = p.block_periods;
  j["steps_per_period"] = p.steps_per_period;
  j["t_en"] = p.t_en ? ordered_json(*p.t_en) : ordered_json(nullptr);
  j["t_re"] = p.t_re ? ordered_json(*p.t_re) : ordered_json(nullptr);
  j["prep"] = p.prep == PrepConvention::InPhase ? "in-phase" : "quadrature";
  j["snap_signal_time"] = p.snap_signal_time;
  j["noise_sigma"] = p.noise_sigma;
  j["fd_scale"] = p.fd_scale;
  return j;
}

// ---------------------------------------------------------------------------
// Derived metadata
// ---------------------------------------------------------------------------

struct PointOutcome {
  std::optional<PrecisionResult> result;
  std::string error;
};

void add_sub_sql_interval(ResultTable& table, const ExperimentConfig& cfg,
                          const std::vector<std::vector<PointOutcome>>& out) {
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    std::size_t best_lo = 0, best_len = 0;
    for (std::size_t i = 0; i < out.size();) {
      if (!(out[i][m].result && out[i][m].result->beats_sql())) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < out.size() && out[j][m].result && out[j][m].result->beats_sql()) ++j;
      if (j - i > best_len) {
        best_lo = i;
        best_len = j - i;
      }
      i = j;
    }
    const std::string key = "sub_sql_interval_" + mode_label(cfg.modes[m]);
    table.metadata()[key] = best_len == 0 ? "none"
                                          : "[" + format_number(cfg.sweep.values[best_lo]) + ", " +
                                                format_number(cfg.sweep.values[best_lo + best_len - 1]) + "]";
  }
}

void add_scaling_fit(ResultTable& table, const ExperimentConfig& cfg,
                     const std::vector<std::vector<PointOutcome>>& out) {
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    std::vector<ScalingSample> samples;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i][m].result) samples.push_back({cfg.sweep.values[i], out[i][m].result->delta_omega0});
    }
    const std::string key = "fit_" + mode_label(cfg.modes[m]);
    try {
      const ScalingFit fit = fit_scaling(samples);
      table.metadata()[key + "_prefactor"] = format_number(fit.prefactor);
      table.metadata()[key + "_exponent"] = format_number(fit.exponent);
      table.metadata()[key + "_r_squared"] = format_number(fit.r_squared);
    } catch (const Error& e) {
      table.metadata()[key] = std::string("unavailable: ") + e.what();
    }
  }
}

void add_sql_crossing(ResultTable& table, const ExperimentConfig& cfg,
                      const std::vector<std::vector<PointOutcome>>& out) {
  for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
    std::string value = "none";
    for (std::size_t i = 1; i < out.size(); ++i) {
      const auto& a = out[i - 1][m].result;
      const auto& b = out[i][m].result;
      if (!a || !b) continue;
      const double fa = a->delta_omega0 - a->sql;
      const double fb = b->delta_omega0 - b->sql;
      if (fa < 0.0 && fb >= 0.0) {
        const double x0 = cfg.sweep.values[i - 1], x1 = cfg.sweep.values[i];
        value = format_number(x0 + (x1 - x0) * (-fa) / (fb - fa));
        break;
      }
    }
    table.metadata()["sql_crossing_" + mode_label(cfg.modes[m])] = value;
  }
}

Cell metadata_number(const PrecisionResult& r, const std::string& key) {
  const auto it = r.metadata.find(key);
  if (it == r.metadata.end()) return Cell{};
  return Cell{std::strtod(it->second.c_str(), nullptr)};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(PipelineKind kind) {
  return kind == PipelineKind::Ramsey ? "ramsey" : "full-stage";
}

std::string format_diagnostic(const Diagnostic& d) { return d.field + ": " + d.reason; }

std::string version() { return AIQM_VERSION; }

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : kPresets) v.emplace_back(p.name);
    return v;
  }();
  return names;
}

std::string preset_description(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p.description;
  }
  throw ConfigError("experiment", "unknown preset '" + std::string(name) + "'");
}

const std::vector<std::string>& recognized_axes() { return kAxes; }

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.experiment = std::string(name);
  using M = SimulationMode;
  if (name == "fig2-panels") {
    c.modes = {M::FullDrive, M::Bare, M::Ideal};
    c.sweep = {"delta_ts", linspace(-kPi, kPi, 41)};
  } else if (name == "fig2-timesweep") {
    c.modes = {M::FullDrive, M::Ideal, M::Bare};
    c.sweep = {"t_s", linspace(0.01, 0.1, 10)};
  } else if (name == "fig2-chisweep") {
    c.modes = {M::FullDrive, M::Effective, M::Ideal, M::Bare};
    c.sweep = {"chi", {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}};
  } else if (name == "fig3-omega") {
    c.modes = {M::FullDrive, M::Ideal};
    c.physics.snap_signal_time = true;
    c.sweep = {"omega_m_factor", {2.0, 5.0, 10.0, 20.0, 40.0}};
  } else if (name == "fig3-ratio") {
    c.modes = {M::Ideal};
    c.sweep = {"drive_ratio", linspace(0.55, 0.95, 41)};
  } else if (name == "fig3-alpha") {
    c.modes = {M::Ideal};
    c.sweep = {"alpha2_over_pi", linspace(0.2, 0.8, 61)};
  } else if (name == "fig4-compare" || name == "fig4-scaling" || name == "fig4-noise") {
    c.pipeline = PipelineKind::FullStage;
    c.physics.omega_m_factor = 100.0;
    if (name == "fig4-compare") {
      c.modes = {M::Ideal, M::FullDrive, M::Bare};
      c.sweep = {"N", {20, 40, 60, 80, 100}};
    } else if (name == "fig4-scaling") {
      c.modes = {M::Ideal};
      c.sweep = {"N", {20, 40, 60, 80, 100}};
    } else {
      c.modes = {M::Ideal};
      c.sweep = {"noise_sigma", linspace(0.0, 20.0, 41)};
    }
  } else if (name == "custom-sweep") {
    c.modes = {M::Ideal};
    c.sweep = {"t_s", {c.physics.t_s}};
  } else {
    throw ConfigError("experiment", "unknown preset '" + std::string(name) + "'");
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::vector<Diagnostic>& diags) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    diags.push_back({"<root>", std::string("not valid JSON: ") + e.what()});
    return preset("custom-sweep");
  }
  if (!j.is_object()) {
    diags.push_back({"<root>", "expected a JSON object"});
    return preset("custom-sweep");
  }
  Reader r{diags};
  r.unknown_keys(j, "", {"experiment", "pipeline", "physics", "modes", "sweep", "output", "workers", "husimi"});

  std::string name = "custom-sweep";
  r.string(j, "experiment", "experiment", name);
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    diags.push_back({"experiment", "unknown experiment '" + name + "' (known: " + list + ")"});
    name = "custom-sweep";
  }
  ExperimentConfig c = preset(name);

  std::string pipeline;
  if (r.string(j, "pipeline", "pipeline", pipeline)) {
    if (pipeline == "ramsey") {
      c.pipeline = PipelineKind::Ramsey;
    } else if (pipeline == "full-stage") {
      c.pipeline = PipelineKind::FullStage;
    } else {
      r.bad("pipeline", "expected \"ramsey\" or \"full-stage\"");
    }
  }
  if (j.contains("physics")) read_physics(r, j.at("physics"), c.physics);
  if (j.contains("modes")) {
    const json& m = j.at("modes");
    if (!m.is_array()) {
      r.bad("modes", "expected an array of mode names");
    } else {
      c.modes.clear();
      for (std::size_t i = 0; i < m.size(); ++i) {
        const std::string field = "modes[" + std::to_string(i) + "]";
        if (!m[i].is_string()) {
          r.bad(field, "expected a string");
          continue;
        }
        try {
          c.modes.push_back(parse_mode(m[i].get<std::string>()));
        } catch (const DomainError& e) {
          r.bad(field, e.what());
        }
      }
    }
  }
  if (j.contains("sweep")) read_sweep(r, j.at("sweep"), c.sweep);
  if (j.contains("output")) {
    const json& o = j.at("output");
    if (!o.is_object()) {
      r.bad("output", "expected an object");
    } else {
      r.unknown_keys(o, "output", {"path", "format"});
      r.string(o, "path", "output.path", c.output_path);
      r.string(o, "format", "output.format", c.output_format);
    }
  }
  if (j.contains("workers")) {
    int w = 0;
    const std::size_t before = diags.size();
    r.integer(j, "workers", "workers", w);
    if (diags.size() == before) c.workers = w;
  }
  if (j.contains("husimi")) {
    const json& h = j.at("husimi");
    if (!h.is_object()) {
      r.bad("husimi", "expected an object");
    } else {
      r.unknown_keys(h, "husimi", {"n_theta", "n_phi"});
      r.integer(h, "n_theta", "husimi.n_theta", c.husimi.n_theta);
      r.integer(h, "n_phi", "husimi.n_phi", c.husimi.n_phi);
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path, std::vector<Diagnostic>& diags) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    diags.push_back({"<file>", "cannot read '" + path + "'"});
    return preset("custom-sweep");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), diags);
}

std::vector<Diagnostic> validate_config(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> d;
  try {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
      d.push_back({"experiment", "unknown experiment '" + cfg.experiment + "'"});
    }
    if (cfg.modes.empty()) d.push_back({"modes", "at least one mode is required"});
    std::set<SimulationMode> seen;
    for (std::size_t i = 0; i < cfg.modes.size(); ++i) {
      if (!seen.insert(cfg.modes[i]).second) d.push_back({"modes[" + std::to_string(i) + "]", "duplicate mode"});
    }
    if (std::find(kAxes.begin(), kAxes.end(), cfg.sweep.axis) == kAxes.end()) {
      std::string list;
      for (const auto& a : kAxes) list += (list.empty() ? "" : ", ") + a;
      d.push_back({"sweep.axis", "unknown axis '" + cfg.sweep.axis + "' (recognized: " + list + ")"});
    }
    if (cfg.sweep.values.empty()) d.push_back({"sweep.values", "at least one sweep value is required"});
    if (cfg.output_format != "csv" && cfg.output_format != "json") {
      d.push_back({"output.format", "expected \"csv\" or \"json\""});
    }
    if (cfg.workers && *cfg.workers < 1) d.push_back({"workers", "must be >= 1"});
    if (cfg.husimi.n_theta < 2) d.push_back({"husimi.n_theta", "must be >= 2"});
    if (cfg.husimi.n_phi < 2) d.push_back({"husimi.n_phi", "must be >= 2"});

    std::vector<Diagnostic> base;
    check_physics(cfg.physics, cfg.pipeline, cfg.modes, base);
    d.insert(d.end(), base.begin(), base.end());
    const bool axis_ok = std::find(kAxes.begin(), kAxes.end(), cfg.sweep.axis) != kAxes.end();
    if (base.empty() && axis_ok) {
      for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
        std::vector<Diagnostic> point;
        const double v = cfg.sweep.values[i];
        const bool integral_axis =
            cfg.sweep.axis == "N" || cfg.sweep.axis == "block_periods" || cfg.sweep.axis == "steps_per_period";
        if (!std::isfinite(v) || (integral_axis && v != std::round(v))) {
          point.push_back({cfg.sweep.axis, "needs a finite" + std::string(integral_axis ? " integer" : "") +
                                               " value, got " + format_number(v)});
        } else {
          check_physics(apply_axis(cfg.physics, cfg.sweep.axis, v), cfg.pipeline, cfg.modes, point);
        }
        for (const auto& p : point) {
          d.push_back({"sweep.values[" + std::to_string(i) + "]", format_diagnostic(p)});
        }
      }
    }
  } catch (const std::exception& e) {
    d.push_back({"<internal>", e.what()});
  }
  return d;
}

std::string canonical_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"] = cfg.experiment;
  j["pipeline"] = std::string(to_string(cfg.pipeline));
  j["physics"] = physics_json(cfg.physics);
  j["modes"] = ordered_json::array();
  for (auto m : cfg.modes) j["modes"].push_back(mode_label(m));
  j["sweep"]["axis"] = cfg.sweep.axis;
  j["sweep"]["values"] = cfg.sweep.values;
  j["husimi"]["n_theta"] = cfg.husimi.n_theta;
  j["husimi"]["n_phi"] = cfg.husimi.n_phi;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(canonical_json(cfg) + "|" + version()); }

PhysicsConfig apply_axis(const PhysicsConfig& base, const std::string& axis, double v) {
  PhysicsConfig p = base;
  if (axis == "N") {
    p.n_particles = static_cast<int>(std::lround(v));
  } else if (axis == "chi") {
    p.chi = v;
  } else if (axis == "delta") {
    p.delta = v;
  } else if (axis == "delta_ts") {
    p.delta = v / p.t_s;
  } else if (axis == "t_s") {
    p.t_s = v;
  } else if (axis == "chi_t_en") {
    p.chi_t_en = v;
  } else if (axis == "omega_m_factor") {
    p.omega_m_factor = v;
  } else if (axis == "drive_ratio") {
    p.drive_ratio = v;
  } else if (axis == "alpha2_over_pi") {
    p.alpha2_over_pi = v;
  } else if (axis == "block_periods") {
    p.block_periods = static_cast<int>(std::lround(v));
  } else if (axis == "steps_per_period") {
    p.steps_per_period = static_cast<int>(std::lround(v));
  } else if (axis == "noise_sigma") {
    p.noise_sigma = v;
  } else if (axis == "t_en") {
    p.t_en = v;
  } else if (axis == "t_re") {
    p.t_re = v;
  } else {
    throw ConfigError("sweep.axis", "unknown axis '" + axis + "'");
  }
  return p;
}

namespace {

DriveSettings drive_settings(const PhysicsConfig& p) {
  DriveSettings d;
  d.omega_m_factor = p.omega_m_factor;
  d.drive_ratio = p.drive_ratio;
  d.block_periods = p.block_periods;
  d.propagation.steps_per_drive_period = p.steps_per_period;
  return d;
}

}  // namespace

RamseyConfig ramsey_config(const PhysicsConfig& p, SimulationMode mode) {
  RamseyConfig c;
  c.n_particles = p.n_particles;
  c.chi = p.chi;
  c.delta = p.delta;
  c.t_s = p.t_s;
  c.chi_t_en = p.chi_t_en;
  c.alpha2 = p.alpha2_over_pi * kPi;
  c.snap_signal_time = p.snap_signal_time;
  c.mode = mode;
  c.drive = drive_settings(p);
  c.fd_scale = p.fd_scale;
  return c;
}

FullStageConfig full_stage_config(const PhysicsConfig& p, SimulationMode mode) {
  FullStageConfig c;
  c.n_particles = p.n_particles;
  c.chi = p.chi;
  c.delta = p.delta;
  c.t_s = p.t_s;
  c.t_en = p.t_en;
  c.t_re = p.t_re;
  c.prep = p.prep;
  c.snap_signal_time = p.snap_signal_time;
  c.mode = mode;
  c.drive = drive_settings(p);
  c.fd_scale = p.fd_scale;
  return c;
}

PrecisionResult run_point(PipelineKind pipeline, const PhysicsConfig& p, SimulationMode mode) {
  PrecisionResult r = pipeline == PipelineKind::Ramsey ? run_fig2_protocol(ramsey_config(p, mode))
                                                       : run_full_stage_protocol(full_stage_config(p, mode));
  if (p.noise_sigma > 0.0) {
    r = apply_detection_noise(r, NoiseModel{p.noise_sigma});
  }
  r.metadata["noise_sigma"] = format_number(p.noise_sigma);
  return r;
}

int resolve_workers(std::optional<int> flag, std::optional<int> config) {
  if (flag && *flag >= 1) return *flag;
  if (config && *config >= 1) return *config;
  if (const char* env = std::getenv("AIQM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ResultTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto diags = validate_config(cfg);
  if (!diags.empty()) throw ConfigError(diags.front().field, diags.front().reason);

  const std::size_t n_points = cfg.sweep.values.size();
  const std::size_t n_modes = cfg.modes.size();
  std::vector<std::vector<PointOutcome>> out(n_points, std::vector<PointOutcome>(n_modes));
  std::vector<PhysicsConfig> points;
  points.reserve(n_points);
  for (double v : cfg.sweep.values) points.push_back(apply_axis(cfg.physics, cfg.sweep.axis, v));

  const std::size_t n_tasks = n_points * n_modes;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const std::size_t i = t / n_modes, m = t % n_modes;
      try {
        out[i][m].result = run_point(cfg.pipeline, points[i], cfg.modes[m]);
      } catch (const std::exception& e) {
        out[i][m].error = e.what();
      }
    }
  };
  const int workers = std::min<int>(resolve_workers(opts.workers, cfg.workers), static_cast<int>(n_tasks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  const auto ideal_it = std::find(cfg.modes.begin(), cfg.modes.end(), SimulationMode::Ideal);
  const bool has_reference = ideal_it != cfg.modes.end() && n_modes > 1;
  const std::size_t ref = static_cast<std::size_t>(ideal_it - cfg.modes.begin());

  std::vector<Column> cols{{cfg.sweep.axis, axis_unit(cfg.sweep.axis)}, {"t_s", "time"}};
  for (auto mode : cfg.modes) {
    const std::string l = mode_label(mode);
    cols.push_back({"jz_mean_" + l, ""});
    cols.push_back({"jz_std_" + l, ""});
    cols.push_back({"slope_" + l, "time"});
    cols.push_back({"delta_omega0_" + l, "rad/time"});
    cols.push_back({"beats_sql_" + l, ""});
    cols.push_back({"richardson_" + l, ""});
    if (cfg.pipeline == PipelineKind::FullStage) {
      cols.push_back({"t_en_" + l, "time"});
      cols.push_back({"t_re_" + l, "time"});
    }
  }
  cols.push_back({"sql", "rad/time"});
  cols.push_back({"hl", "rad/time"});
  if (has_reference) {
    for (std::size_t m = 0; m < n_modes; ++m) {
      if (m != ref) cols.push_back({"rel_dev_" + mode_label(cfg.modes[m]), ""});
    }
  }
  cols.push_back({"error", ""});
  ResultTable table(std::move(cols));

  const bool stage_columns = cfg.pipeline == PipelineKind::FullStage;
  for (std::size_t i = 0; i < n_points; ++i) {
    std::vector<Cell> row{cfg.sweep.values[i]};
    const PrecisionResult* any = nullptr;
    for (const auto& o : out[i]) {
      if (o.result) {
        any = &*o.result;
        break;
      }
    }
    row.emplace_back(any ? Cell{any->t_s} : Cell{});
    std::string errors;
    for (std::size_t m = 0; m < n_modes; ++m) {
      const auto& o = out[i][m];
      if (o.result) {
        const auto& r = *o.result;
        row.insert(row.end(), {r.jz_mean, r.jz_std, r.slope, r.delta_omega0, r.beats_sql() ? 1.0 : 0.0,
                               r.richardson_rel_change});
        if (stage_columns) {
          row.emplace_back(metadata_number(r, "t_en_actual"));
          row.emplace_back(metadata_number(r, "t_re_actual"));
        }
      } else {
        row.insert(row.end(), stage_columns ? 8 : 6, Cell{});
        errors += (errors.empty() ? "" : "; ") + mode_label(cfg.modes[m]) + ": " + o.error;
      }
    }
    if (any) {
      row.emplace_back(any->sql);
      row.emplace_back(any->hl);
    } else {
      row.insert(row.end(), 2, Cell{});
    }
    if (has_reference) {
      for (std::size_t m = 0; m < n_modes; ++m) {
        if (m == ref) continue;
        const auto& a = out[i][m].result;
        const auto& b = out[i][ref].result;
        if (a && b) {
          row.emplace_back(std::abs(a->delta_omega0 - b->delta_omega0) / b->delta_omega0);
        } else {
          row.emplace_back(Cell{});
        }
      }
    }
    row.emplace_back(errors);
    table.add_row(std::move(row));
  }

  auto& md = table.metadata();
  md["aiqm_version"] = version();
  md["experiment"] = cfg.experiment;
  md["pipeline"] = std::string(to_string(cfg.pipeline));
  md["config_hash"] = config_hash(cfg);
  md["config"] = canonical_json(cfg);
  md["sweep_axis"] = cfg.sweep.axis;
  if (cfg.sweep.axis == "delta_ts") md["x_variable"] = "delta_ts = delta * t_s";
  md["sql_convention"] = "sql = 1/(sqrt(N) t_s), hl = 1/(N t_s), unit constants, no K0 factor";
  md["units"] = "frequencies in rad/time, times in time; chi sets the scale";
  md["precision"] = "delta_omega0 = jz_std/|slope|, slope by central difference in delta, h = fd_scale/t_s";
  if (any_of(cfg.modes.begin(), cfg.modes.end(), [](auto m) { return m == SimulationMode::FullDrive; })) {
    md["full_drive_integrator"] = "piecewise-exponential midpoint, " +
                                  std::to_string(cfg.physics.steps_per_period) + " steps per period";
  }
  if (n_points > 1) add_sub_sql_interval(table, cfg, out);
  if (cfg.sweep.axis == "N" && n_points >= 3) add_scaling_fit(table, cfg, out);
  if (cfg.sweep.axis == "noise_sigma") add_sql_crossing(table, cfg, out);
  if (opts.timestamp) md["timestamp"] = utc_timestamp();
  return table;
}

std::vector<std::pair<std::string, HusimiMap>> husimi_checkpoints(const ExperimentConfig& cfg) {
  const auto diags = validate_config(cfg);
  if (!diags.empty()) throw ConfigError(diags.front().field, diags.front().reason);
  const FullStagePipeline pipe(full_stage_config(cfg.physics, cfg.modes.front()));
  const StageCheckpoints cp = pipe.checkpoints(cfg.physics.delta);
  std::vector<std::pair<std::string, HusimiMap>> maps;
  for (std::size_t i = 0; i < cp.states.size(); ++i) {
    maps.emplace_back(StageCheckpoints::names[i],
                      husimi_q(pipe.system(), cp.states[i], cfg.husimi.n_theta, cfg.husimi.n_phi));
  }
  return maps;
}

}  // namespace aiqm
