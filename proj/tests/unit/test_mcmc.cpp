#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "ampc/diagnostics.hpp"
#include "ampc/error.hpp"
#include "ampc/mcmc.hpp"
#include "ampc/models.hpp"
#include "ampc/regression.hpp"

using namespace ampc;

namespace {

std::shared_ptr<const ModelEvaluator> evaluator(std::shared_ptr<const ForwardModel> m) {
  return std::make_shared<ModelEvaluator>(std::move(m));
}

std::string csv(const Chain& c) {
  std::ostringstream os;
  write_chain_csv(c, os);
  return os.str();
}

// Nonlinear toy on the unit box that the order-3 prior surrogate cannot
// represent, so refinements fire.
InverseProblem exp_problem() {
  return InverseProblem(evaluator(make_exp_sum_model(2, 1.0)), PriorSpec::uniform_box(2, 0.0, 1.5),
                        Eigen::VectorXd::Constant(1, std::exp(1.2)), NoiseModel::known(0.05));
}

} // namespace

TEST_CASE("acceptance probability") {
  CHECK(mh_accept_prob(-1.0, -1.0) == 1.0);
  CHECK(mh_accept_prob(0.0, std::log(0.5)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mh_accept_prob(0.0, -INFINITY) == 0.0);
  CHECK(mh_accept_prob(0.0, 3.0) == 1.0);
  CHECK(mh_accept_prob(0.0, 0.0, std::log(2.0), 0.0) == doctest::Approx(0.5));
}

TEST_CASE("random walk on a standard 2-D Gaussian") {
  InverseProblem p(evaluator(make_linear_model(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2))),
                   PriorSpec::uniform_box(2, -50.0, 50.0), Eigen::VectorXd::Zero(2), NoiseModel::known(1.0));
  const Chain c = run_mh(p, ProposalSpec::uniform_steps(2, 1.6), 100000, Eigen::VectorXd::Zero(2),
                         MhTarget::exact(), 2024);
  CHECK(c.size() == 100000);
  const ChainSummary s = chain_summary(c, 0.0);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(s.means[j]) < 3.0 * s.standard_deviations[j] / std::sqrt(s.ess[j]));
    CHECK(s.standard_deviations[j] * s.standard_deviations[j] == doctest::Approx(1.0).epsilon(0.1));
  }
  CHECK(c.accept_count <= c.size());
}

TEST_CASE("zero step keeps the chain at the start") {
  InverseProblem p = exp_problem();
  const Eigen::Vector2d start(0.5, 0.6);
  const Chain c = run_mh(p, ProposalSpec::uniform_steps(2, 0.0), 200, start, MhTarget::exact(), 1);
  for (const auto& s : c.states) CHECK(s == Eigen::VectorXd(start));
}

TEST_CASE("surrogate identical to the model reproduces the exact chain") {
  ModelEvaluator fit(make_exp_sum_model(2, 1.0));
  const PriorSpec prior = PriorSpec::uniform_box(2, 0.0, 1.5);
  auto s = std::make_shared<PcSurrogate>(fit_prior_surrogate(fit, prior, 3, 4));
  InverseProblem p(evaluator(std::make_shared<SurrogateModel>(s)), prior, Eigen::VectorXd::Constant(1, 3.0),
                   NoiseModel::known(0.1));
  const auto prop = ProposalSpec::uniform_steps(2, 0.1);
  const Chain exact = run_mh(p, prop, 3000, Eigen::Vector2d(0.5, 0.5), MhTarget::exact(), 9);
  const Chain surr = run_mh(p, prop, 3000, Eigen::Vector2d(0.5, 0.5), MhTarget::with_surrogate(*s), 9);
  CHECK(csv(exact) == csv(surr));
}

TEST_CASE("run_mh rejects bad input") {
  InverseProblem p = exp_problem();
  CHECK_THROWS_AS(run_mh(p, ProposalSpec::uniform_steps(2, 0.1), 10, Eigen::Vector2d(2.0, 0.0), MhTarget::exact(), 1),
                  InputError);
  CHECK_THROWS_AS(run_mh(p, ProposalSpec::uniform_steps(3, 0.1), 10, Eigen::Vector2d(0.5, 0.5), MhTarget::exact(), 1),
                  InputError);
  CHECK_THROWS_AS(run_mh(p, ProposalSpec{Eigen::Vector2d(0.1, -0.1)}, 10, Eigen::Vector2d(0.5, 0.5), MhTarget::exact(), 1),
                  InputError);
}

TEST_CASE("error indicator") {
  auto high = std::make_shared<FunctionModel>("three", 1, 3, [](const Eigen::VectorXd&) {
    return Eigen::Vector3d(1.0, -3.0, 2.0).eval();
  });
  ModelEvaluator h(high);
  const PcSurrogate zero(BasisFamily::LegendreUniform, total_degree_index_set(1, 0), Eigen::MatrixXd::Zero(1, 3),
                         PriorMap::identity(1));
  CHECK(error_indicator(h, zero, Eigen::VectorXd::Zero(1)) == 3.0);
  CHECK(h.ledger().snapshot()[EvalCategory::Indicator] == 1);

  auto poly = make_polynomial_model(2, {{{2, 1}, 1.0}, {{0, 1}, -0.5}});
  ModelEvaluator pe(poly);
  const PcSurrogate fit = fit_prior_surrogate(pe, PriorSpec::uniform_box(2, 0.0, 1.0), 3, 3);
  CHECK(error_indicator(pe, fit, Eigen::Vector2d(0.37, 0.81)) < 1e-9);
}

TEST_CASE("disabled refinement reproduces the surrogate-only chain") {
  InverseProblem p = exp_problem();
  AmpcConfig cfg;
  cfg.subchain_length = 400;
  cfg.max_iterations = 6;
  cfg.epsilon = AmpcConfig::kNoRefinement;
  cfg.epsilon0 = AmpcConfig::kNoRefinement;
  cfg.seed = 31;
  const auto prop = ProposalSpec::uniform_steps(2, 0.05);
  const Eigen::Vector2d start(0.6, 0.6);
  const AmpcResult r = run_ampc(p, cfg, prop, start);
  const Chain plain = run_mh(p, prop, 2400, start, MhTarget::with_surrogate(r.prior_surrogate), 31);
  CHECK(r.chain.refinement_events.empty());
  REQUIRE(r.chain.size() == plain.size());
  CHECK(r.chain.states == plain.states);
  CHECK(r.chain.accepted == plain.accepted);
}

TEST_CASE("an exact prior surrogate never refines") {
  auto poly = make_polynomial_model(2, {{{1, 1}, 1.0}, {{2, 0}, 0.5}, {{0, 0}, -0.2}});
  InverseProblem p(evaluator(poly), PriorSpec::standard_gaussian(2), Eigen::VectorXd::Constant(1, 0.4),
                   NoiseModel::known(0.3));
  AmpcConfig cfg;
  cfg.subchain_length = 200;
  cfg.max_iterations = 7;
  cfg.seed = 5;
  const AmpcResult r = run_ampc(p, cfg, ProposalSpec::uniform_steps(2, 0.3), Eigen::Vector2d(0.0, 0.0));
  CHECK(r.chain.refinement_events.empty());
  CHECK(r.chain.size() == 1400);
  const LedgerSnapshot l = p.model().ledger().snapshot();
  CHECK(l[EvalCategory::Offline] == 20);
  CHECK(l[EvalCategory::Ratio] == 14);
  CHECK(l[EvalCategory::Indicator] == 0);
  CHECK(l[EvalCategory::Refinement] == 0);
  CHECK(l.total() == 34);
}

TEST_CASE("adaptive run bookkeeping") {
  InverseProblem p = exp_problem();
  AmpcConfig cfg;
  cfg.subchain_length = 300;
  cfg.max_iterations = 10;
  cfg.epsilon = 1e-6;
  cfg.epsilon0 = 10.0;
  cfg.seed = 77;
  const AmpcResult r = run_ampc(p, cfg, ProposalSpec::uniform_steps(2, 0.05), Eigen::Vector2d(0.6, 0.6));
  const Chain& c = r.chain;
  CHECK(c.size() == 3000);
  REQUIRE(c.iterations.size() == 10);
  REQUIRE(!c.refinement_events.empty());
  CHECK(r.shrink_count == static_cast<int>(c.refinement_events.size()));
  CHECK(r.final_radius == cfg.radius * std::pow(cfg.rho, r.shrink_count));

  double radius = cfg.radius;
  int last_iteration = 0;
  for (const auto& e : c.refinement_events) {
    CHECK(e.radius == radius);
    CHECK(e.design_size == 12);
    CHECK(e.iteration > last_iteration);
    last_iteration = e.iteration;
    radius *= cfg.rho;
  }
  for (const auto& it : c.iterations) {
    CHECK(it.alpha >= 0.0);
    CHECK(it.alpha <= 1.0);
    CHECK(it.beta >= 0.0);
    CHECK(it.beta <= 1.0);
    CHECK(it.radius_after <= cfg.radius);
    CHECK(it.generation_at_beta == it.generation_before + (it.refined ? 1 : 0));
  }
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (!c.accepted[k]) CHECK(c.states[k] == c.states[k - 1]);
  }
  const LedgerSnapshot l = p.model().ledger().snapshot();
  CHECK(l[EvalCategory::Refinement] == 12 * c.refinement_events.size());
  CHECK(l[EvalCategory::Offline] == 20);
  CHECK(l.total() == l[EvalCategory::Offline] + l[EvalCategory::Refinement] + l[EvalCategory::Ratio] +
                         l[EvalCategory::Indicator]);
  CHECK(l[EvalCategory::Ratio] + l[EvalCategory::Indicator] <= 20);
  CHECK(c.ledger.total() == l.total());
  CHECK(c.iterations.back().hf_evaluations == l.total());
}

TEST_CASE("radius shrinks only inside the epsilon0 band") {
  InverseProblem p = exp_problem();
  AmpcConfig cfg;
  cfg.subchain_length = 200;
  cfg.max_iterations = 6;
  cfg.epsilon = 1e-9;
  cfg.epsilon0 = 1e-8;
  cfg.seed = 3;
  const AmpcResult r = run_ampc(p, cfg, ProposalSpec::uniform_steps(2, 0.05), Eigen::Vector2d(0.6, 0.6));
  CHECK(!r.chain.refinement_events.empty());
  CHECK(r.shrink_count == 0);
  CHECK(r.final_radius == cfg.radius);
}

TEST_CASE("adaptive runs are deterministic") {
  auto run = [](std::uint64_t seed) {
    InverseProblem p = exp_problem();
    AmpcConfig cfg;
    cfg.subchain_length = 250;
    cfg.max_iterations = 4;
    cfg.seed = seed;
    return csv(run_ampc(p, cfg, ProposalSpec::uniform_steps(2, 0.05), Eigen::Vector2d(0.6, 0.6)).chain);
  };
  CHECK(run(8) == run(8));
  CHECK(run(8) != run(9));
}

TEST_CASE("configuration validation") {
  AmpcConfig cfg;
  cfg.validate();
  cfg.subchain_length = 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.rho = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.epsilon = 0.5;
  cfg.epsilon0 = 0.1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.correction_order = 4;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("chain CSV round trip") {
  InverseProblem p(evaluator(make_linear_model(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1))),
                   PriorSpec::standard_gaussian(1), Eigen::VectorXd::Constant(1, 0.3), NoiseModel::hierarchical());
  const Chain c = run_mh(p, ProposalSpec::uniform_steps(2, 0.3), 500, Eigen::Vector2d(0.0, -1.0), MhTarget::exact(), 4);
  const auto path = (std::filesystem::temp_directory_path() / "ampc_chain_roundtrip.csv").string();
  write_chain_csv(c, path);
  const Chain back = read_chain_csv(path);
  std::filesystem::remove(path);
  CHECK(back.has_log_sigma2);
  CHECK(back.parameter_dimension == 1);
  CHECK(back.states == c.states);
  CHECK(back.log_posteriors == c.log_posteriors);
  CHECK(back.accept_count == c.accept_count);
  CHECK(csv(c).rfind("step,z1,log_sigma2,log_posterior,accepted\n", 0) == 0);
}
