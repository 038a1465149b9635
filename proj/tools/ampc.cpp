// ampc: configuration-driven front end.
//
//   ampc generate-data   CONFIG
//   ampc build-surrogate CONFIG
//   ampc run             CONFIG
//   ampc diagnose        CONFIG [--chain FILE] [--surrogate FILE] [--epsilon X]
//   ampc compare         CONFIG... --output-dir DIR
//
// Flags override config fields. On failure a JSON error record goes to
// stderr and to <output_dir>/error.json when the output directory is known.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ampc/cli.hpp"
#include "ampc/config.hpp"
#include "ampc/error.hpp"

namespace {

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::int64_t> n_steps;
};

std::optional<std::string> g_error_dir;

ampc::RunConfig load(const std::string& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw ampc::InputError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ampc::InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ampc::InputError("config file '" + path + "' must hold a JSON object");
  if (j.contains("output_dir") && j["output_dir"].is_string()) g_error_dir = j["output_dir"].get<std::string>();
  if (o.output_dir) j["output_dir"] = *o.output_dir;
  if (o.seed) j["seed"] = *o.seed;
  if (o.method && j.contains("method") && j["method"].is_object()) j["method"]["name"] = *o.method;
  if (o.n_steps && j.contains("method") && j["method"].is_object()) j["method"]["n_steps"] = *o.n_steps;
  if (o.output_dir) g_error_dir = *o.output_dir;
  ampc::RunConfig c = ampc::parse_run_config(j);
  g_error_dir = c.output_dir;
  return c;
}

int report_error(const std::exception& e) {
  const nlohmann::json err = ampc::error_json(e);
  std::cerr << err.dump() << '\n';
  if (g_error_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*g_error_dir, ec);
    std::ofstream out(std::filesystem::path(*g_error_dir) / "error.json");
    if (out) out << err.dump(2) << '\n';
  }
  return dynamic_cast<const ampc::InputError*>(&e) ? 2 : 1;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--output-dir", o.output_dir, "Override output_dir");
  cmd->add_option("--seed", o.seed, "Override seed");
  cmd->add_option("--method", o.method, "Override method.name")->check(CLI::IsMember({"direct", "prior_pc", "ampc"}));
  cmd->add_option("--n-steps", o.n_steps, "Override method.n_steps");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multi-fidelity polynomial chaos MCMC"};
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  std::vector<std::string> configs;
  ampc::DiagnoseOptions diag;
  std::string compare_dir = "compare_out";
  int grid_nodes = 41;

  auto* gen = app.add_subcommand("generate-data", "Write synthetic data and its provenance");
  auto* build = app.add_subcommand("build-surrogate", "Fit the prior-based surrogate of order method.N");
  auto* run = app.add_subcommand("run", "Run direct, prior_pc or ampc inference");
  auto* diagnose = app.add_subcommand("diagnose", "Summarize a chain and estimate the feasible-set measure");
  auto* compare = app.add_subcommand("compare", "Run several configs and tabulate the results");
  for (auto* cmd : {gen, build, run, diagnose}) {
    cmd->add_option("config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(cmd, o);
  }
  diagnose->add_option("--chain", diag.chain_path, "Chain CSV (default <output_dir>/chain.csv)");
  diagnose->add_option("--surrogate", diag.surrogate_path, "Surrogate JSON for the feasible-set estimate");
  diagnose->add_option("--epsilon", diag.epsilon, "Feasible-set threshold (default method.epsilon)");
  diagnose->add_option("--feasible-samples", diag.feasible_samples, "Thinned samples for the estimate");
  diagnose->add_option("--bins", diag.bins, "Histogram bins");
  compare->add_option("configs", configs, "Run configs (JSON)")->required()->check(CLI::ExistingFile);
  compare->add_option("--output-dir", compare_dir, "Directory for compare.csv and compare.json");
  compare->add_option("--grid-nodes", grid_nodes, "Histogram nodes per axis for KL/Hellinger");
  compare->add_option("--seed", o.seed, "Override seed in every config");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json report;
    if (gen->parsed()) {
      report = ampc::cmd_generate_data(load(config, o));
    } else if (build->parsed()) {
      report = ampc::cmd_build_surrogate(load(config, o));
    } else if (run->parsed()) {
      report = ampc::cmd_run(load(config, o));
    } else if (diagnose->parsed()) {
      report = ampc::cmd_diagnose(load(config, o), diag);
    } else {
      g_error_dir = compare_dir;
      std::vector<ampc::RunConfig> parsed;
      for (const auto& path : configs) parsed.push_back(load(path, Overrides{std::nullopt, o.seed, {}, {}}));
      g_error_dir = compare_dir;
      report = ampc::cmd_compare(parsed, compare_dir, grid_nodes);
    }
    std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}
