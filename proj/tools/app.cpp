#include "app.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "config.hpp"
#include "dsub/errors.hpp"
#include "dsub/scenario_io.hpp"

namespace dsub::cli {

namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool allow_unknown = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot read config '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string resolve(const std::string& path, const fs::path& base) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (base / path).lexically_normal().string();
}

experiment::ExperimentConfig load(const Invocation& inv) {
  auto config = parse_config(read_file(inv.config_path), !inv.allow_unknown);
  const fs::path base = fs::path(inv.config_path).parent_path();
  config.scenario.edge_file = resolve(config.scenario.edge_file, base);
  config.scenario.dump_file = resolve(config.scenario.dump_file, base);
  if (inv.seed) config.scenario.seed = *inv.seed;
  if (!inv.out_dir.empty()) config.output.dir = inv.out_dir;
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int cmd_validate(const Invocation& inv, std::ostream& out) {
  const auto config = load(inv);
  const auto prepared = experiment::prepare_scenario(config);
  out << fmt::format("{}: ok ({} nodes, dimension {}, rank {})\n", inv.config_path,
                     prepared.model.nodes, prepared.model.dimension, prepared.model.rank);
  return kExitOk;
}

int cmd_dump(const Invocation& inv, std::ostream& out) {
  const auto config = load(inv);
  const auto prepared = experiment::prepare_scenario(config);
  std::ostringstream text;
  scenario::write_scenario(text, prepared.model, prepared.topology, prepared.mode,
                           prepared.locals);
  if (inv.out_dir.empty()) {
    out << text.str();
  } else {
    fs::create_directories(inv.out_dir);
    write_file(fs::path(inv.out_dir) / "scenario.txt", text.str());
  }
  return kExitOk;
}

int cmd_run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const auto config = load(inv);
  const auto prepared = experiment::prepare_scenario(config);
  const fs::path dir(config.output.dir);
  fs::create_directories(dir);

  experiment::ExperimentResult result;
  try {
    result = experiment::run_experiment(config, prepared);
  } catch (const DivergenceDetected& e) {
    std::ostringstream summary;
    summary << "status diverged\n";
    summary << "algorithm " << e.algorithm() << '\n';
    summary << "run " << (e.run() ? *e.run() + 1 : 0) << '\n';
    summary << "iteration " << (e.iteration() ? *e.iteration() : 0) << '\n';
    summary << "node " << e.node() + 1 << '\n';
    write_file(dir / "summary.txt", summary.str());
    err << "dsubspace: " << e.what() << '\n';
    return kExitDiverged;
  }

  for (const auto& r : result.results) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_file(dir / fmt::format("msd_{}.csv", r.trace.label), csv.str());
  }
  std::ostringstream summary;
  write_summary(summary, config, result);
  write_file(dir / "summary.txt", summary.str());
  out << summary.str();
  return kExitOk;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return fmt::format("{:.17g}", value);
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const metrics::MsdTrace& trace) {
  out << "iteration,msd_linear,msd_db";
  if (trace.has_per_node()) {
    for (std::size_t k = 0; k < trace.node_count; ++k) out << ",node_" << k + 1;
  }
  out << '\n';
  for (std::size_t n = 0; n < trace.size(); ++n) {
    out << n << ',' << format_real(trace.linear[n]) << ',' << format_real(trace.db(n));
    if (trace.has_per_node()) {
      for (std::size_t k = 0; k < trace.node_count; ++k) {
        out << ',' << format_real(trace.node_value(n, k));
      }
    }
    out << '\n';
  }
}

void write_summary(std::ostream& out, const experiment::ExperimentConfig& config,
                   const experiment::ExperimentResult& result) {
  out << "status ok\n";
  out << "seed " << config.scenario.seed << '\n';
  out << "runs " << config.run.runs << '\n';
  out << "iterations " << config.run.iterations << '\n';
  for (const auto& r : result.results) {
    out << fmt::format("{} steady_state_db={} window={} transfers_per_iteration={}\n",
                       r.trace.label, format_real(r.steady_state_db), r.window,
                       r.transfers_per_iteration);
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subspace-constrained distributed estimation simulator", "dsubspace"};
  app.require_subcommand(1);

  Invocation inv;
  auto add_common = [&inv](CLI::App* sub, bool with_out) {
    sub->add_option("config", inv.config_path, "Experiment config file")->required();
    sub->add_option("--seed", inv.seed, "Override scenario.seed");
    if (with_out) sub->add_option("--out", inv.out_dir, "Output directory");
    sub->add_flag("--allow-unknown", inv.allow_unknown, "Ignore unknown config keys");
  };
  auto* run = app.add_subcommand("run", "Run the Monte-Carlo experiment and write CSV traces");
  auto* validate = app.add_subcommand("validate", "Check a config without writing files");
  auto* dump = app.add_subcommand("dump-scenario", "Write the generated scenario");
  add_common(run, true);
  add_common(validate, false);
  add_common(dump, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dsubspace: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(inv, out, err);
    if (validate->parsed()) return cmd_validate(inv, out);
    return cmd_dump(inv, out);
  } catch (const DivergenceDetected& e) {
    err << "dsubspace: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const Error& e) {
    err << "dsubspace: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "dsubspace: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace dsub::cli
