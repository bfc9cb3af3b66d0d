#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aiqm/protocol.hpp"
#include "aiqm/result_table.hpp"

namespace aiqm {

enum class PipelineKind { Ramsey, FullStage };

std::string_view to_string(PipelineKind kind);

/// Physics parameters shared by every sweep point. Keys match the config file.
struct PhysicsConfig {
  int n_particles = 100;  // "N"
  double chi = 1.0;
  double delta = 1.0;
  double t_s = 0.01;
  double chi_t_en = 0.03;
  double omega_m_factor = 20.0;
  std::optional<double> drive_ratio;
  double alpha2_over_pi = 0.5;
  int block_periods = 1;
  int steps_per_period = 64;
  std::optional<double> t_en;
  std::optional<double> t_re;
  PrepConvention prep = PrepConvention::InPhase;
  bool snap_signal_time = false;
  double noise_sigma = 0.0;
  double fd_scale = 1e-4;
};

struct SweepConfig {
  std::string axis;
  std::vector<double> values;
};

struct HusimiConfig {
  int n_theta = 91;
  int n_phi = 180;
};

struct ExperimentConfig {
  std::string experiment = "custom-sweep";
  PipelineKind pipeline = PipelineKind::Ramsey;
  PhysicsConfig physics;
  std::vector<SimulationMode> modes{SimulationMode::Ideal};
  SweepConfig sweep;
  std::string output_path;    // empty: caller decides (stdout for `run`)
  std::string output_format = "csv";
  std::optional<int> workers;
  HusimiConfig husimi;
};

struct Diagnostic {
  std::string field;   ///< dotted path, e.g. "physics.N"
  std::string reason;
};

std::string format_diagnostic(const Diagnostic& d);

const std::vector<std::string>& preset_names();
/// Throws ConfigError on an unknown name.
ExperimentConfig preset(std::string_view name);
/// One-line description used by `list-presets`.
std::string preset_description(std::string_view name);

const std::vector<std::string>& recognized_axes();

/// Parses JSON text. Fields absent from the text keep the defaults of the named preset
/// ("experiment" key, default custom-sweep). Parse problems land in diags; never throws.
ExperimentConfig parse_config(std::string_view text, std::vector<Diagnostic>& diags);
/// Reads and parses a file; an unreadable file is reported as a diagnostic on "<file>".
ExperimentConfig load_config_file(const std::string& path, std::vector<Diagnostic>& diags);

/// Empty for a valid config. Never throws.
std::vector<Diagnostic> validate_config(const ExperimentConfig& cfg);

/// Canonical JSON of everything that affects the data (workers and output excluded).
std::string canonical_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Applies a sweep value to a copy of the physics block.
PhysicsConfig apply_axis(const PhysicsConfig& base, const std::string& axis, double value);

RamseyConfig ramsey_config(const PhysicsConfig& p, SimulationMode mode);
FullStageConfig full_stage_config(const PhysicsConfig& p, SimulationMode mode);

/// One protocol run (plus detection noise if noise_sigma > 0).
PrecisionResult run_point(PipelineKind pipeline, const PhysicsConfig& p, SimulationMode mode);

struct RunOptions {
  std::optional<int> workers;  ///< overrides cfg.workers
  bool timestamp = false;      ///< adds a wall-clock "timestamp" metadata line
};

/// flag > config > AIQM_WORKERS > hardware concurrency (at least 1).
int resolve_workers(std::optional<int> flag, std::optional<int> config);

/// Throws ConfigError for an invalid config. Per-point failures go to the row's error column.
ResultTable run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Husimi maps at the four full-stage checkpoints, for the first configured mode.
std::vector<std::pair<std::string, HusimiMap>> husimi_checkpoints(const ExperimentConfig& cfg);

std::string version();

}  // namespace aiqm
