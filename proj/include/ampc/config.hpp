#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/bayes.hpp"
#include "ampc/forward_model.hpp"
#include "ampc/mcmc.hpp"
#include "ampc/models.hpp"
#include "ampc/prior.hpp"

namespace ampc {

inline constexpr int kConfigSchemaVersion = 1;

/// Inference-time noise. `from_data` takes sigma from the data provenance
/// (sigma itself for Gaussian noise, max|u| * delta for relative-max noise).
struct NoiseConfig {
  enum class Kind { Known, FromData, Hierarchical };
  Kind kind = Kind::FromData;
  double sigma = 0.0;
  double shape = 1e-3;
  double scale = 1e-3;
};

struct SyntheticConfig {
  std::optional<Eigen::VectorXd> true_params;
  // Truth drawn uniformly on [lower, upper] per coordinate when true_params is absent.
  double draw_lower = 0.0;
  double draw_upper = 0.0;
  std::uint64_t draw_seed = 0;
  NoiseSpec noise;
  int fine_factor = 2;
  std::uint64_t seed = 0;
};

struct DataConfig {
  std::optional<std::string> file;
  std::optional<SyntheticConfig> synthetic;
};

enum class Method { Direct, PriorPc, Ampc };
std::string_view to_string(Method method);

struct MethodConfig {
  Method kind = Method::Ampc;
  AmpcConfig ampc;           // N, N_C, epsilon, epsilon0, R, rho, m, I_max (seed unused here)
  std::int64_t n_steps = 50000;
  std::optional<Eigen::VectorXd> steps; // one entry, or one per state coordinate
  double burn_in = 0.4;
  std::optional<std::string> surrogate_file;
  std::optional<Eigen::VectorXd> start;
  double start_log_sigma2 = 0.0;
};

struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  nlohmann::json model;
  PriorSpec prior;
  NoiseConfig noise;
  DataConfig data;
  MethodConfig method;
  std::string output_dir = "ampc_out";
  std::uint64_t seed = 0;
};

/// Validates against the version-1 schema (unknown keys are rejected) and
/// fills defaults. Throws InputError naming the offending field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
/// Fully resolved config; parsing it again gives the same RunConfig.
nlohmann::json to_json(const RunConfig& config);

std::shared_ptr<const ForwardModel> build_model(const nlohmann::json& model);

struct LoadedData {
  Eigen::VectorXd values;
  nlohmann::json provenance; // may be null for bare data files
};

/// Generate (synthetic block) or read (file block) the observations.
LoadedData resolve_data(const RunConfig& config, const ForwardModel& model);
Eigen::VectorXd synthetic_truth(const SyntheticConfig& synthetic, int n_params);

NoiseModel resolve_noise(const RunConfig& config, const LoadedData& data);

/// Per-coordinate proposal steps: explicit, or 0.05 x width for bounded
/// coordinates and 0.1 x sd for Gaussian ones; 0.1 for log sigma^2.
ProposalSpec resolve_proposal(const RunConfig& config, int state_dimension);
/// Explicit start, or the prior centre; log sigma^2 appended when needed.
Eigen::VectorXd resolve_start(const RunConfig& config, int state_dimension);

void write_data_csv(const Eigen::VectorXd& data, const std::string& path);
Eigen::VectorXd read_data_csv(const std::string& path);

} // namespace ampc
