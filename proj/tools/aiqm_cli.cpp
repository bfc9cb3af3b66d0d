// aiqm: experiment runner for the AIQM metrology simulator.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aiqm/errors.hpp"
#include "aiqm/experiment.hpp"
#include "json.hpp"

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kInvalidConfig = 3, kIo = 4 };

void emit(const std::string& level, const std::string& field, const std::string& reason) {
  nlohmann::ordered_json j;
  j["level"] = level;
  if (!field.empty()) j["field"] = field;
  j["reason"] = reason;
  std::cerr << j.dump() << '\n';
}

bool is_preset(const std::string& s) {
  const auto& names = aiqm::preset_names();
  return std::find(names.begin(), names.end(), s) != names.end();
}

std::optional<aiqm::ExperimentConfig> load(const std::string& target, std::vector<aiqm::Diagnostic>& diags) {
  aiqm::ExperimentConfig cfg = is_preset(target) ? aiqm::preset(target) : aiqm::load_config_file(target, diags);
  if (!diags.empty()) return std::nullopt;
  return cfg;
}

int report(const std::vector<aiqm::Diagnostic>& diags) {
  for (const auto& d : diags) emit("error", d.field, d.reason);
  return kInvalidConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AIQM-driven one-axis-twisting metrology simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aiqm::version());

  std::string target;
  std::string output;
  std::string mode;
  std::string format;
  std::optional<int> workers;
  bool timestamp = false;

  auto* run = app.add_subcommand("run", "run a preset or a config file and write the result table");
  run->add_option("target", target, "preset name or path to a JSON config")->required();
  run->add_option("-o,--output", output, "output file ('-' for stdout; default from config, else stdout)");
  run->add_option("-w,--workers", workers, "worker threads (overrides config and AIQM_WORKERS)")
      ->check(CLI::Range(1, 4096));
  run->add_option("-m,--mode", mode, "run a single simulation mode")
      ->check(CLI::IsMember({"full", "effective", "ideal", "bare"}));
  run->add_option("-f,--format", format, "csv or json (default from config)")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--timestamp", timestamp, "record a UTC timestamp in the metadata block");

  auto* validate = app.add_subcommand("validate", "check a config file and print diagnostics");
  std::string validate_target;
  validate->add_option("config", validate_target, "preset name or path to a JSON config")->required();

  auto* list = app.add_subcommand("list-presets", "list the built-in experiments");

  auto* husimi = app.add_subcommand("husimi", "write Husimi-Q CSVs at the four full-stage checkpoints");
  std::string husimi_target;
  std::string husimi_dir = ".";
  std::string husimi_mode;
  husimi->add_option("config", husimi_target, "preset name or path to a JSON config")->required();
  husimi->add_option("-o,--output", husimi_dir, "output directory (default: current directory)");
  husimi->add_option("-m,--mode", husimi_mode, "simulation mode for the stages")
      ->check(CLI::IsMember({"full", "effective", "ideal", "bare"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*list) {
      for (const auto& name : aiqm::preset_names()) {
        std::cout << name << "  " << aiqm::preset_description(name) << '\n';
      }
      return kOk;
    }

    if (*validate) {
      std::vector<aiqm::Diagnostic> diags;
      auto cfg = load(validate_target, diags);
      if (!cfg) return report(diags);
      diags = aiqm::validate_config(*cfg);
      if (!diags.empty()) return report(diags);
      std::cout << "ok: " << cfg->experiment << " (" << cfg->sweep.values.size() << " points, hash "
                << aiqm::config_hash(*cfg) << ")\n";
      return kOk;
    }

    if (*husimi) {
      std::vector<aiqm::Diagnostic> diags;
      auto cfg = load(husimi_target, diags);
      if (!cfg) return report(diags);
      if (!husimi_mode.empty()) cfg->modes = {aiqm::parse_mode(husimi_mode)};
      cfg->pipeline = aiqm::PipelineKind::FullStage;
      diags = aiqm::validate_config(*cfg);
      if (!diags.empty()) return report(diags);
      std::error_code ec;
      std::filesystem::create_directories(husimi_dir, ec);
      for (const auto& [name, map] : aiqm::husimi_checkpoints(*cfg)) {
        const auto path = std::filesystem::path(husimi_dir) / ("husimi_" + name + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) {
          emit("error", "--output", "cannot write " + path.string());
          return kIo;
        }
        map.write_csv(out);
        std::cout << path.string() << '\n';
      }
      return kOk;
    }

    std::vector<aiqm::Diagnostic> diags;
    auto cfg = load(target, diags);
    if (!cfg) return report(diags);
    if (!mode.empty()) cfg->modes = {aiqm::parse_mode(mode)};
    if (!format.empty()) cfg->output_format = format;
    if (!output.empty()) cfg->output_path = output;
    diags = aiqm::validate_config(*cfg);
    if (!diags.empty()) return report(diags);

    aiqm::RunOptions opts;
    opts.workers = workers;
    opts.timestamp = timestamp;
    const aiqm::ResultTable table = aiqm::run_experiment(*cfg, opts);

    const std::size_t err_col = table.column_index("error");
    std::size_t failed = 0;
    for (const auto& row : table.rows()) {
      if (const auto* s = std::get_if<std::string>(&row[err_col]); s && !s->empty()) ++failed;
    }
    if (failed) emit("warning", "", std::to_string(failed) + " sweep point(s) recorded errors; see the error column");

    const std::string body = cfg->output_format == "json" ? table.to_json() : table.to_csv();
    if (cfg->output_path.empty() || cfg->output_path == "-") {
      std::cout << body;
    } else {
      std::ofstream out(cfg->output_path, std::ios::binary);
      if (!out || !(out << body)) {
        emit("error", "output.path", "cannot write " + cfg->output_path);
        return kIo;
      }
    }
    return kOk;
  } catch (const aiqm::ConfigError& e) {
    emit("error", e.field(), e.what());
    return kInvalidConfig;
  } catch (const std::exception& e) {
    emit("error", "", e.what());
    return kRuntime;
  }
}
