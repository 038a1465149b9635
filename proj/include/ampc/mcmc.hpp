#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/bayes.hpp"
#include "ampc/forward_model.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

/// Symmetric Gaussian random walk with per-coordinate step sizes.
struct ProposalSpec {
  Eigen::VectorXd steps;

  static ProposalSpec uniform_steps(int dimension, double step);
  void validate(int state_dimension) const;
};

/// min{1, exp(dlog target + dlog q)} in log space; a -inf proposed target gives 0.
/// log_q_forward = log q(proposed | current), log_q_backward = log q(current | proposed).
double mh_accept_prob(double log_target_current, double log_target_proposed,
                      double log_q_forward = 0.0, double log_q_backward = 0.0);

struct RefinementEvent {
  int iteration = 0;
  Eigen::VectorXd center;
  double radius = 0.0;     // radius used for this refinement
  double error = 0.0;      // err(y) that triggered it
  std::int64_t design_size = 0;
  int generation = 0;      // surrogate generation after the merge
};

/// Per outer iteration bookkeeping of the adaptive sampler.
struct IterationRecord {
  int iteration = 0;
  Eigen::VectorXd candidate;  // z*
  Eigen::VectorXd y;
  double alpha = 0.0;         // high-fidelity acceptance probability
  double beta = 0.0;          // surrogate acceptance probability after refresh
  double error = 0.0;         // err(y)
  bool refined = false;
  bool accepted = false;
  double radius_after = 0.0;
  int generation_before = 0;  // surrogate generation entering the iteration
  int generation_at_beta = 0; // generation used for beta
  std::uint64_t hf_evaluations = 0; // ledger total at the end of the iteration
};

/// MH sample store. States exclude the starting point.
struct Chain {
  int parameter_dimension = 0;
  bool has_log_sigma2 = false;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> log_posteriors;
  std::vector<std::uint8_t> accepted;
  std::uint64_t accept_count = 0;
  std::vector<RefinementEvent> refinement_events;
  std::vector<IterationRecord> iterations;
  LedgerSnapshot ledger;

  std::size_t size() const { return states.size(); }
  int state_dimension() const { return parameter_dimension + (has_log_sigma2 ? 1 : 0); }
  double acceptance_rate() const {
    return states.empty() ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(states.size());
  }
  /// n x state_dimension matrix of the states after dropping `burn_in` of them.
  Eigen::MatrixXd matrix(std::size_t burn_in = 0) const;
  void append(const Eigen::VectorXd& state, double log_posterior, bool was_accepted);
};

/// Which posterior a plain MH run targets.
struct MhTarget {
  const PcSurrogate* surrogate = nullptr; // nullptr: exact posterior (ledgered as direct)

  static MhTarget exact() { return {}; }
  static MhTarget with_surrogate(const PcSurrogate& s) { return {&s}; }
};

/// Plain random-walk Metropolis-Hastings; deterministic given the seed.
Chain run_mh(const InverseProblem& problem, const ProposalSpec& proposal, std::int64_t n_steps,
             const Eigen::VectorXd& start, MhTarget target, std::uint64_t seed);

/// err(y) = |u^H(y) - u^L(y)|_inf; one high-fidelity evaluation (indicator).
double error_indicator(const ModelEvaluator& high, const PcSurrogate& low, const Eigen::VectorXd& y);

struct AmpcConfig {
  int subchain_length = 5000; // m
  int max_iterations = 10;    // I_max
  double epsilon = 1e-3;
  double epsilon0 = 0.1;
  double radius = 0.1;
  double rho = 0.5;
  int order = 3;              // N
  int correction_order = 2;   // N_C
  std::uint64_t seed = 0;

  /// Refinement disabled.
  static constexpr double kNoRefinement = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct AmpcResult {
  Chain chain;
  PcSurrogate prior_surrogate;
  PcSurrogate final_surrogate;
  double final_radius = 0.0;
  int shrink_count = 0;
};

/// Adaptive multi-fidelity MH. When `prior_surrogate` is absent the order-N
/// prior surrogate is fitted first (offline evaluations on the problem's
/// ledger).
AmpcResult run_ampc(const InverseProblem& problem, const AmpcConfig& config,
                    const ProposalSpec& proposal, const Eigen::VectorXd& start,
                    const std::optional<PcSurrogate>& prior_surrogate = std::nullopt);

/// Seed for the prior-surrogate design derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Export.
void write_chain_csv(const Chain& chain, std::ostream& out);
void write_chain_csv(const Chain& chain, const std::string& path);
Chain read_chain_csv(const std::string& path);
nlohmann::json refinement_events_json(const Chain& chain);

} // namespace ampc
