#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "lorentz/experiments.hpp"

namespace lorentz::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char *kVersion = "0.1.0";

/// Names accepted by run_experiment, in the order shown by --help.
const std::vector<std::string> &experiment_names();

/// Shortest-exact double text: 17 significant digits.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180: CRLF line ends, fields quoted when they contain , " CR or LF.
std::string to_csv(const Table &t);

/// An experiment name plus everything needed to run it.
struct RunPlan {
  std::string experiment;
  ExperimentConfig config;
  json params;  // experiment-specific settings with defaults filled in
};

/// Merges the config file object with flag values (flags win), fills
/// defaults and validates. Throws UnknownExperiment or InvalidConfig.
RunPlan parse_config(const std::string &experiment, const json &file, const json &flags);

/// Reads a JSON config file; IoError when unreadable, InvalidConfig when
/// it is not a JSON object.
json read_config_file(const std::filesystem::path &path);

/// Config echo used inside data files. Excludes the worker count so data
/// files do not depend on it.
json config_echo(const RunPlan &plan);

/// One named output produced by an experiment, before it touches disk.
struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

/// Runs the experiment and renders its data files (JSON, CSV, SVG).
std::vector<Artifact> render_experiment(const RunPlan &plan);

/// Renders an SVG from a report document. kind is "clt", "tail" or
/// "correlation". Throws UnsupportedKind or EmptyData.
std::string emit_plot(const json &report, const std::string &kind);

/// Writes path.partial and renames it over path.
void write_atomic(const std::filesystem::path &path, const std::string &content);

struct RunOutcome {
  int exit_code{0};
  json manifest;
};

/// Full run: data files are written as .partial, promoted on success, and
/// the manifest is written last. On error the .partial files stay and the
/// manifest records the error. Exit codes: 0 ok, 2 config, 3 runtime,
/// 4 statistical guard.
RunOutcome run_experiment(const RunPlan &plan, const std::filesystem::path &out_dir);

/// Records a run that failed before it started (bad config, unknown
/// experiment) in out_dir/manifest.json. `raw` is the unvalidated input.
RunOutcome record_failure(const std::string &experiment, const json &raw, const std::exception &e,
                          const std::filesystem::path &out_dir);

/// Exit code for an exception escaping a run.
int exit_code_for(const std::exception &e);

}  // namespace lorentz::io
