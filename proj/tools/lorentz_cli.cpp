// Command-line front end: one experiment per invocation, plus `plot`.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/io.hpp"

namespace io = lorentz::io;
using io::json;

namespace {

struct Setting {
  const char *key;
  const char *names;
  const char *help;
};

const std::vector<Setting> &settings() {
  static const std::vector<Setting> s{
      {"sigma", "--sigma", "disk radius in (0, 1/2)"},
      {"n", "--n", "collisions per trajectory"},
      {"trials", "--trials", "trajectories or samples"},
      {"seed", "--seed", "64-bit seed"},
      {"threads", "--threads", "worker count (LORENTZ_THREADS wins)"},
      {"block_size", "--block-size,--block_size", "trials per work unit"},
      {"flight_cap", "--flight-cap,--flight_cap", "largest allowed free flight"},
      {"t_grid", "--t-grid,--t_grid", "JSON list of [x, y] frequencies"},
      {"s_grid", "--s-grid,--s_grid", "JSON list of times in (0, 1)"},
      {"H", "--H", "short/long truncation level"},
      {"H_hat", "--H-hat,--H_hat", "second truncation level"},
      {"j_max", "--j-max,--j_max", "largest correlation lag"},
      {"xi", "--xi", "corridor direction, e.g. 1,0"},
      {"N", "--N", "cell index"},
      {"M_grid", "--M-grid,--M_grid", "singularity indices, e.g. 100,1000"},
      {"stratified", "--stratified", "stratified cell estimator (true/false)"},
      {"a", "--a", "exponent in the arithmetic sums"},
      {"totient_n", "--totient-n,--totient_n", "upper limit of the totient sum"},
      {"steps", "--steps", "invariance step counts, e.g. 1,10"},
      {"H_grid", "--H-grid,--H_grid", "tail thresholds"},
      {"p", "--p", "Lp exponent in [1, 2)"},
  };
  return s;
}

// Integral floats become integers so "--trials 1e6" is accepted.
json normalize(json v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e18) {
      return d >= 0 ? json(static_cast<std::uint64_t>(d)) : json(static_cast<std::int64_t>(d));
    }
  } else if (v.is_array()) {
    for (auto &e : v) e = normalize(e);
  }
  return v;
}

// Flag text is read as JSON; "1,0" is read as the list [1,0]; anything else
// stays a string and fails type checking in parse_config.
json flag_value(const std::string &key, const std::string &text) {
  static const std::set<std::string> lists{"t_grid", "s_grid", "xi", "M_grid", "steps", "H_grid"};
  for (const std::string &candidate : {text, "[" + text + "]"}) {
    try {
      json v = normalize(json::parse(candidate));
      if (lists.count(key) && !v.is_array()) v = json::array({v});
      return v;
    } catch (const json::exception &) {
    }
  }
  return text;
}

struct RunOptions {
  std::string experiment;
  std::string config;
  std::string out{"results"};
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option *> options;
};

void add_run_options(CLI::App *sub, RunOptions &o) {
  sub->add_option("--config", o.config, "JSON config file; flags override its values");
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  for (const auto &s : settings()) {
    o.options[s.key] = sub->add_option(s.names, o.values[s.key], s.help);
  }
}

int run(const RunOptions &o) {
  json file = json::object();
  json flags = json::object();
  for (const auto &[key, opt] : o.options) {
    if (opt->count() > 0) flags[key] = flag_value(key, o.values.at(key));
  }
  io::RunPlan plan;
  try {
    if (!o.config.empty()) file = normalize(io::read_config_file(o.config));
    plan = io::parse_config(o.experiment, file, flags);
  } catch (const std::exception &e) {
    json raw = file;
    for (const auto &[k, v] : flags.items()) raw[k] = v;
    const auto outcome = io::record_failure(o.experiment, raw, e, o.out);
    std::cerr << "error: " << e.what() << "\n";
    return outcome.exit_code;
  }
  const auto outcome = io::run_experiment(plan, o.out);
  const json &m = outcome.manifest;
  if (outcome.exit_code != 0) {
    std::cerr << "error: " << m["error"]["message"].get<std::string>() << "\n";
    return outcome.exit_code;
  }
  for (const auto &f : m["outputs"]) std::cout << (std::filesystem::path(o.out) / f.get<std::string>()).string() << "\n";
  std::cout << (std::filesystem::path(o.out) / "manifest.json").string() << "\n";
  return 0;
}

int plot(const std::string &input, const std::string &kind, const std::string &output) {
  try {
    std::ifstream in(input);
    if (!in) throw lorentz::IoError("cannot read " + input);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception &e) {
      throw lorentz::EmptyData(input + " is not a JSON report: " + e.what());
    }
    const std::string svg = io::emit_plot(doc, kind);
    io::write_atomic(output, svg);
    std::cout << output << "\n";
    return 0;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return io::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Planar periodic Lorentz gas experiments"};
  app.set_version_flag("--version", io::kVersion);
  app.require_subcommand(1);

  std::vector<RunOptions> per_experiment(io::experiment_names().size());
  for (std::size_t i = 0; i < per_experiment.size(); ++i) {
    per_experiment[i].experiment = io::experiment_names()[i];
    auto *sub = app.add_subcommand(per_experiment[i].experiment,
                                   "run the " + per_experiment[i].experiment + " experiment");
    add_run_options(sub, per_experiment[i]);
  }

  RunOptions generic;
  auto *run_cmd = app.add_subcommand("run", "run the experiment named by --experiment");
  run_cmd->add_option("--experiment", generic.experiment, "experiment name")->required();
  add_run_options(run_cmd, generic);

  std::string input, kind, output;
  auto *plot_cmd = app.add_subcommand("plot", "render an SVG from a JSON report");
  plot_cmd->add_option("--input", input, "report JSON file")->required();
  plot_cmd->add_option("--kind", kind, "clt, tail or correlation")->required();
  plot_cmd->add_option("--output", output, "SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (plot_cmd->parsed()) return plot(input, kind, output);
  if (run_cmd->parsed()) return run(generic);
  for (std::size_t i = 0; i < per_experiment.size(); ++i) {
    if (app.get_subcommand(per_experiment[i].experiment)->parsed()) return run(per_experiment[i]);
  }
  return 2;
}
