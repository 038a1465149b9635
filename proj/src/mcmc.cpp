#include "ampc/mcmc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ampc/error.hpp"
#include "ampc/multifidelity.hpp"
#include "ampc/regression.hpp"

namespace ampc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Proposal draws and accept/reject uniforms share one engine so that a
// surrogate-only chain and an adaptive chain with refinement switched off
// consume identical random streams.
class RandomWalk {
public:
  RandomWalk(const ProposalSpec& proposal, std::uint64_t seed) : steps_(proposal.steps), rng_(seed) {}

  Eigen::VectorXd propose(const Eigen::VectorXd& from) {
    Eigen::VectorXd out(from.size());
    for (Eigen::Index i = 0; i < from.size(); ++i) out[i] = from[i] + steps_[i] * normal_(rng_);
    return out;
  }
  double uniform() { return std::generate_canonical<double, 64>(rng_); }

private:
  Eigen::VectorXd steps_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct MemoEntry {
  Eigen::VectorXd params;
  Eigen::VectorXd output;
};

} // namespace

ProposalSpec ProposalSpec::uniform_steps(int dimension, double step) {
  return {Eigen::VectorXd::Constant(dimension, step)};
}

void ProposalSpec::validate(int state_dimension) const {
  if (steps.size() != state_dimension) {
    throw InputError("proposal has " + std::to_string(steps.size()) + " step sizes, state has " +
                     std::to_string(state_dimension) + " coordinates");
  }
  for (Eigen::Index i = 0; i < steps.size(); ++i) {
    if (!(steps[i] >= 0.0) || !std::isfinite(steps[i])) {
      throw InputError("proposal step sizes must be finite and non-negative");
    }
  }
}

double mh_accept_prob(double log_target_current, double log_target_proposed, double log_q_forward,
                      double log_q_backward) {
  if (log_target_proposed == kNegInf || std::isnan(log_target_proposed)) return 0.0;
  if (log_target_current == kNegInf) return 1.0;
  const double log_ratio = (log_target_proposed - log_target_current) + (log_q_backward - log_q_forward);
  if (log_ratio >= 0.0) return 1.0;
  return std::exp(log_ratio);
}

Eigen::MatrixXd Chain::matrix(std::size_t burn_in) const {
  const std::size_t first = std::min(burn_in, states.size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size() - first), state_dimension());
  for (std::size_t i = first; i < states.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i - first)) = states[i].transpose();
  }
  return m;
}

void Chain::append(const Eigen::VectorXd& state, double log_posterior, bool was_accepted) {
  states.push_back(state);
  log_posteriors.push_back(log_posterior);
  accepted.push_back(was_accepted ? 1 : 0);
  if (was_accepted) ++accept_count;
}

Chain run_mh(const InverseProblem& problem, const ProposalSpec& proposal, std::int64_t n_steps,
             const Eigen::VectorXd& start, MhTarget target, std::uint64_t seed) {
  if (n_steps < 0) throw InputError("number of MH steps must be non-negative");
  proposal.validate(problem.state_dimension());
  if (start.size() != problem.state_dimension()) throw InputError("start state has the wrong dimension");

  auto log_target = [&](const Eigen::VectorXd& state) {
    return target.surrogate ? problem.log_posterior(state, *target.surrogate)
                            : problem.log_posterior(state, EvalCategory::Direct);
  };

  Chain chain;
  chain.parameter_dimension = problem.parameter_dimension();
  chain.has_log_sigma2 = problem.noise().is_hierarchical();
  chain.states.reserve(static_cast<std::size_t>(n_steps));
  chain.log_posteriors.reserve(static_cast<std::size_t>(n_steps));
  chain.accepted.reserve(static_cast<std::size_t>(n_steps));

  Eigen::VectorXd current = start;
  double current_lp = log_target(current);
  if (current_lp == kNegInf) throw InputError("MH start state lies outside the prior support");

  RandomWalk walk(proposal, seed);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    Eigen::VectorXd candidate = walk.propose(current);
    const double candidate_lp = log_target(candidate);
    const double a = mh_accept_prob(current_lp, candidate_lp);
    const bool accept = walk.uniform() < a;
    if (accept) {
      current = std::move(candidate);
      current_lp = candidate_lp;
    }
    chain.append(current, current_lp, accept);
  }
  chain.ledger = problem.model().ledger().snapshot();
  return chain;
}

double error_indicator(const ModelEvaluator& high, const PcSurrogate& low, const Eigen::VectorXd& y) {
  const Eigen::VectorXd h = high.evaluate(y, EvalCategory::Indicator);
  return (h - low.evaluate(y)).cwiseAbs().maxCoeff();
}

void AmpcConfig::validate() const {
  if (subchain_length < 2) throw InputError("subchain length m must be at least 2");
  if (max_iterations < 1) throw InputError("I_max must be at least 1");
  if (!(epsilon > 0.0)) throw InputError("refinement threshold epsilon must be positive");
  if (!(epsilon <= epsilon0) && std::isfinite(epsilon)) {
    throw InputError("thresholds must satisfy epsilon <= epsilon0");
  }
  if (!(rho > 0.0 && rho <= 1.0)) throw InputError("radius shrink factor rho must lie in (0, 1]");
  if (!(radius > 0.0)) throw InputError("initial radius R must be positive");
  if (order < 0) throw InputError("order N must be non-negative");
  if (correction_order < 0 || correction_order > order) {
    throw InputError("correction order must satisfy 0 <= N_C <= N");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

AmpcResult run_ampc(const InverseProblem& problem, const AmpcConfig& config,
                    const ProposalSpec& proposal, const Eigen::VectorXd& start,
                    const std::optional<PcSurrogate>& prior_surrogate) {
  config.validate();
  proposal.validate(problem.state_dimension());
  if (start.size() != problem.state_dimension()) throw InputError("start state has the wrong dimension");

  const ModelEvaluator& high = problem.model();
  PcSurrogate initial = prior_surrogate
                            ? *prior_surrogate
                            : fit_prior_surrogate(high, problem.prior(), config.order,
                                                  derive_seed(config.seed, 0));
  if (initial.n_params() != problem.parameter_dimension() ||
      initial.n_outputs() != high.model().n_outputs()) {
    throw InputError("prior surrogate dimensions do not match the inverse problem");
  }
  if (config.correction_order > initial.order()) {
    throw InputError("correction order exceeds the prior surrogate order");
  }

  AmpcResult result{Chain{}, initial, initial, config.radius, 0};
  PcSurrogate& low = result.final_surrogate;
  Chain& chain = result.chain;
  chain.parameter_dimension = problem.parameter_dimension();
  chain.has_log_sigma2 = problem.noise().is_hierarchical();
  const auto total = static_cast<std::size_t>(config.subchain_length) *
                     static_cast<std::size_t>(config.max_iterations);
  chain.states.reserve(total);
  chain.log_posteriors.reserve(total);
  chain.accepted.reserve(total);

  RandomWalk walk(proposal, config.seed);
  std::mt19937_64 aux(derive_seed(config.seed, 1));
  double radius = config.radius;

  Eigen::VectorXd current = start;
  double current_lp = problem.log_posterior(current, low);
  if (current_lp == kNegInf) throw InputError("AMPC start state lies outside the prior support");

  for (int n = 1; n <= config.max_iterations; ++n) {
    IterationRecord record;
    record.iteration = n;
    record.generation_before = low.provenance().generation;

    // m - 1 surrogate MH steps.
    for (int i = 0; i + 1 < config.subchain_length; ++i) {
      Eigen::VectorXd candidate = walk.propose(current);
      const double candidate_lp = problem.log_posterior(candidate, low);
      const bool accept = walk.uniform() < mh_accept_prob(current_lp, candidate_lp);
      if (accept) {
        current = std::move(candidate);
        current_lp = candidate_lp;
      }
      chain.append(current, current_lp, accept);
    }

    // High-fidelity acceptance probability for z* ~ q(. | z_{m-1}).
    std::vector<MemoEntry> memo;
    auto high_output = [&](const Eigen::VectorXd& state, EvalCategory category) -> Eigen::VectorXd {
      const Eigen::VectorXd params = problem.parameters(state);
      for (const auto& e : memo) {
        if (e.params == params) return e.output;
      }
      memo.push_back({params, high.evaluate(params, category)});
      return memo.back().output;
    };
    auto high_log_posterior = [&](const Eigen::VectorXd& state) {
      if (!problem.in_support(state)) return kNegInf;
      return problem.log_posterior_given(state, high_output(state, EvalCategory::Ratio));
    };

    Eigen::VectorXd candidate = walk.propose(current);
    record.candidate = candidate;
    const double high_candidate = high_log_posterior(candidate);
    record.alpha = high_candidate == kNegInf ? 0.0
                                             : mh_accept_prob(high_log_posterior(current), high_candidate);
    const bool take_candidate = std::generate_canonical<double, 64>(aux) < record.alpha;
    const Eigen::VectorXd y = take_candidate ? candidate : current;
    record.y = y;

    // Error indicator and refinement.
    const Eigen::VectorXd y_params = problem.parameters(y);
    record.error = (high_output(y, EvalCategory::Indicator) - low.evaluate(y_params)).cwiseAbs().maxCoeff();
    const std::uint64_t refinement_seed = aux();
    if (record.error > config.epsilon) {
      const double used_radius = radius;
      MultiFidelitySurrogate mf = build_multifidelity(low, high, problem.prior(),
                                                      config.correction_order, y_params,
                                                      used_radius, refinement_seed);
      low = mf.merged();
      if (record.error <= config.epsilon0) {
        ++result.shrink_count;
        radius = config.radius * std::pow(config.rho, result.shrink_count);
      }
      record.refined = true;
      chain.refinement_events.push_back({n, y_params, used_radius, record.error,
                                         mf.correction().provenance().design_size,
                                         low.provenance().generation});
    }
    record.radius_after = radius;

    // Accept or reject z* with the surrogate as it stands after refinement.
    record.generation_at_beta = low.provenance().generation;
    const double previous_lp = problem.log_posterior(current, low);
    const double candidate_lp = problem.log_posterior(candidate, low);
    record.beta = mh_accept_prob(previous_lp, candidate_lp);
    record.accepted = walk.uniform() < record.beta;
    if (record.accepted) {
      current = std::move(candidate);
      current_lp = candidate_lp;
    } else {
      current_lp = previous_lp;
    }
    chain.append(current, current_lp, record.accepted);
    record.hf_evaluations = high.ledger().snapshot().total();
    chain.iterations.push_back(std::move(record));
  }

  result.final_radius = radius;
  chain.ledger = high.ledger().snapshot();
  return result;
}

void write_chain_csv(const Chain& chain, std::ostream& out) {
  out << "step";
  for (int i = 0; i < chain.parameter_dimension; ++i) out << ",z" << (i + 1);
  if (chain.has_log_sigma2) out << ",log_sigma2";
  out << ",log_posterior,accepted\n";
  char buf[64];
  for (std::size_t k = 0; k < chain.states.size(); ++k) {
    out << (k + 1);
    const auto& s = chain.states[k];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", s[i]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g", chain.log_posteriors[k]);
    out << buf << ',' << static_cast<int>(chain.accepted[k]) << '\n';
  }
}

void write_chain_csv(const Chain& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write chain file '" + path + "'");
  write_chain_csv(chain, out);
}

Chain read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read chain file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("chain file '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 4 || header.front() != "step" || header.back() != "accepted" ||
      header[header.size() - 2] != "log_posterior") {
    throw InputError("chain file '" + path + "' has an unexpected header");
  }
  Chain chain;
  chain.has_log_sigma2 = header[header.size() - 3] == "log_sigma2";
  const int state_dim = static_cast<int>(header.size()) - 3;
  chain.parameter_dimension = state_dim - (chain.has_log_sigma2 ? 1 : 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != header.size()) throw InputError("ragged row in chain file '" + path + "'");
    Eigen::VectorXd state(state_dim);
    for (int i = 0; i < state_dim; ++i) state[i] = values[static_cast<std::size_t>(i) + 1];
    chain.append(state, values[values.size() - 2], values.back() != 0.0);
  }
  return chain;
}

nlohmann::json refinement_events_json(const Chain& chain) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : chain.refinement_events) {
    events.push_back({{"iteration", e.iteration},
                      {"center", vec(e.center)},
                      {"radius", e.radius},
                      {"error", e.error},
                      {"design_size", e.design_size},
                      {"generation", e.generation}});
  }
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& r : chain.iterations) {
    iterations.push_back({{"iteration", r.iteration},
                          {"candidate", vec(r.candidate)},
                          {"y", vec(r.y)},
                          {"alpha", r.alpha},
                          {"beta", r.beta},
                          {"error", r.error},
                          {"refined", r.refined},
                          {"accepted", r.accepted},
                          {"radius_after", r.radius_after},
                          {"generation_before", r.generation_before},
                          {"generation_at_beta", r.generation_at_beta},
                          {"hf_evaluations", r.hf_evaluations}});
  }
  return {{"refinement_events", events}, {"iterations", iterations}};
}

} // namespace ampc
