#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ampc/config.hpp"

namespace ampc {

// Each command writes its artifacts under config.output_dir and returns a
// JSON report naming them.

/// data.csv plus data.provenance.json (truth, seed, noise, fine mesh).
nlohmann::json cmd_generate_data(const RunConfig& config);

/// Prior surrogate of order method.N: surrogate.json and ledger.json.
nlohmann::json cmd_build_surrogate(const RunConfig& config);

/// Run the configured method: chain.csv, refinement_events.json,
/// ledger.json, summary.json, histograms.csv, config.resolved.json, and the
/// surrogates used.
nlohmann::json cmd_run(const RunConfig& config);

struct DiagnoseOptions {
  std::optional<std::string> chain_path;     // default <output_dir>/chain.csv
  std::optional<std::string> surrogate_path; // default final or prior surrogate in output_dir
  std::optional<double> epsilon;             // default method.epsilon
  int feasible_samples = 200;                // thinned posterior samples for the feasible-set estimate
  int bins = 50;
};

/// Chain summary and, when a surrogate is available, the feasible-set
/// measure: diagnostics.json and histograms.csv.
nlohmann::json cmd_diagnose(const RunConfig& config, const DiagnoseOptions& options = {});

/// Runs every config and tabulates evaluation counts, acceptance rates and,
/// when a direct run with at most three parameters is present, KL and
/// Hellinger distances between binned chains on a shared grid.
/// Writes compare.csv and compare.json into `output_dir`.
nlohmann::json cmd_compare(const std::vector<RunConfig>& configs, const std::string& output_dir,
                           int grid_nodes = 41);

/// Machine-readable error record.
nlohmann::json error_json(const std::exception& e);

} // namespace ampc
