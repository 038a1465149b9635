#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ampc/diagnostics.hpp"
#include "ampc/error.hpp"
#include "ampc/models.hpp"
#include "ampc/regression.hpp"

using namespace ampc;

namespace {

GridPosterior gaussian_1d(double mean, double sd, const Eigen::VectorXd& axis) {
  return GridPosterior::evaluate({axis}, [=](const Eigen::VectorXd& z) {
    const double r = (z[0] - mean) / sd;
    return -0.5 * r * r;
  });
}

} // namespace

TEST_CASE("grid normalization") {
  const GridPosterior g = gaussian_1d(0.3, 0.7, linspace(-8.0, 8.0, 401));
  CHECK((g.weights().array() * g.density().array()).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.mean()[0] == doctest::Approx(0.3).epsilon(1e-8));
  const auto two = GridPosterior::evaluate({linspace(0.0, 1.0, 11), linspace(0.0, 2.0, 21)},
                                           [](const Eigen::VectorXd& z) { return z[0] + z[1]; });
  CHECK((two.weights().array() * two.density().array()).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(two.node(22) == Eigen::Vector2d(0.1, 0.1));
  std::vector<Eigen::VectorXd> four(4, linspace(0.0, 1.0, 3));
  CHECK_THROWS_AS(GridPosterior(four, Eigen::VectorXd::Zero(81)), InputError);
}

TEST_CASE("KL divergence") {
  const Eigen::VectorXd axis = linspace(-12.0, 12.0, 2001);
  const GridPosterior p = gaussian_1d(0.0, 1.0, axis);
  CHECK(std::abs(kl_divergence(p, p)) < 1e-10);
  for (double mu : {0.25, 1.0, 2.0}) {
    const GridPosterior q = gaussian_1d(mu, 1.0, axis);
    CHECK(kl_divergence(p, q) == doctest::Approx(mu * mu / 2.0).epsilon(1e-4));
    CHECK(kl_divergence(q, p) >= 0.0);
  }
  const GridPosterior narrow = gaussian_1d(0.5, 0.5, axis);
  // KL(N(m1,s1) || N(m2,s2)) = log(s2/s1) + (s1^2 + (m1-m2)^2) / (2 s2^2) - 1/2
  CHECK(kl_divergence(narrow, p) == doctest::Approx(std::log(2.0) + (0.25 + 0.25) / 2.0 - 0.5).epsilon(1e-6));

  const Eigen::VectorXd box = linspace(0.0, 1.0, 101);
  const GridPosterior left = GridPosterior::evaluate({box}, [](const Eigen::VectorXd& z) {
    return z[0] < 0.5 ? 0.0 : -INFINITY;
  });
  const GridPosterior everywhere = GridPosterior::evaluate({box}, [](const Eigen::VectorXd&) { return 0.0; });
  CHECK(kl_divergence(left, everywhere) > 0.0);
  CHECK_THROWS_AS(kl_divergence(everywhere, left), SupportError);
  CHECK_THROWS_AS(kl_divergence(p, everywhere), InputError);
}

TEST_CASE("Hellinger distance") {
  const Eigen::VectorXd axis = linspace(-12.0, 12.0, 2001);
  const GridPosterior p = gaussian_1d(0.0, 1.0, axis);
  const GridPosterior q = gaussian_1d(1.0, 1.0, axis);
  CHECK(hellinger_distance(p, p) == 0.0);
  CHECK(hellinger_distance(p, q) == doctest::Approx(std::sqrt(1.0 - std::exp(-1.0 / 8.0))).epsilon(1e-4));
  CHECK(hellinger_distance(p, q) <= std::sqrt(kl_divergence(p, q)) / std::sqrt(2.0) + 1e-12);

  const Eigen::VectorXd box = linspace(0.0, 1.0, 101);
  const GridPosterior left = GridPosterior::evaluate({box}, [](const Eigen::VectorXd& z) {
    return z[0] < 0.45 ? 0.0 : -INFINITY;
  });
  const GridPosterior right = GridPosterior::evaluate({box}, [](const Eigen::VectorXd& z) {
    return z[0] > 0.55 ? 0.0 : -INFINITY;
  });
  CHECK(hellinger_distance(left, right) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("histogram posteriors") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd samples(200000, 1);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) samples(i, 0) = g(rng);
  const Eigen::VectorXd axis = linspace(-5.0, 5.0, 101);
  const GridPosterior h = GridPosterior::from_samples({axis}, samples);
  const GridPosterior exact = gaussian_1d(0.0, 1.0, axis);
  CHECK(kl_divergence(h, exact) < 1e-3);
  CHECK(std::abs(h.mean()[0]) < 0.01);
}

TEST_CASE("effective sample size") {
  std::vector<double> constant(500, 2.5);
  CHECK(effective_sample_size(constant) == 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> iid(10000);
  for (double& v : iid) v = g(rng);
  CHECK(effective_sample_size(iid) == doctest::Approx(10000.0).epsilon(0.15));
  // AR(1) with phi: integrated autocorrelation time (1 + phi) / (1 - phi).
  std::vector<double> ar(200000);
  const double phi = 0.9;
  ar[0] = 0.0;
  for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = phi * ar[i - 1] + std::sqrt(1 - phi * phi) * g(rng);
  CHECK(effective_sample_size(ar) == doctest::Approx(200000.0 * (1 - phi) / (1 + phi)).epsilon(0.15));
}

TEST_CASE("chain summary") {
  Chain c;
  c.parameter_dimension = 2;
  for (int i = 0; i < 100; ++i) c.append(Eigen::Vector2d(1.0, -1.0), 0.0, i % 4 == 0);
  const ChainSummary s = chain_summary(c, 0.4, 10);
  CHECK(s.burn_in == 40);
  CHECK(s.used == 60);
  CHECK(s.standard_deviations.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.ess[0] == 1.0);
  CHECK(s.acceptance_rate == 25.0 / 100.0);
  CHECK(s.marginals.size() == 2);
  CHECK(s.pairs.size() == 1);
  CHECK(s.marginals[0].counts.sum() == 60.0);
  CHECK(s.pairs[0].counts.sum() == 60.0);
  CHECK(s.means[1] == -1.0);

  const auto j = to_json(s, {"z1", "z2"});
  CHECK(j["coordinates"][1]["name"] == "z2");
  std::ostringstream os;
  write_histograms_csv(s, {"z1", "z2"}, os);
  CHECK(os.str().rfind("coordinate,bin,lower,upper,count\n", 0) == 0);
  CHECK_THROWS_AS(chain_summary(c, 1.0), InputError);
}

TEST_CASE("total variation of binned samples") {
  std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{0.6, 0.7, 0.8, 0.9};
  CHECK(total_variation_1d(a, a, 10) == 0.0);
  CHECK(total_variation_1d(a, b, 2) == 1.0);
}

TEST_CASE("feasible-set measure") {
  auto poly = make_polynomial_model(2, {{{1, 1}, 2.0}, {{0, 0}, 1.0}});
  auto eval = std::make_shared<ModelEvaluator>(poly);
  const PriorSpec prior = PriorSpec::uniform_box(2, 0.0, 1.0);
  InverseProblem p(eval, prior, Eigen::VectorXd::Constant(1, 1.5), NoiseModel::known(0.1));
  const PcSurrogate exact = fit_prior_surrogate(*eval, prior, 2, 3);
  Eigen::MatrixXd samples(50, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < samples.size(); ++i) samples.data()[i] = u(rng);
  const auto before = eval->ledger().snapshot()[EvalCategory::Diagnostic];
  const FeasibleSetEstimate e = feasible_set_measure(p, exact, 1e-8, samples);
  CHECK(e.fraction == 0.0);
  CHECK(e.samples == 50);
  CHECK(eval->ledger().snapshot()[EvalCategory::Diagnostic] - before == 50);

  const PcSurrogate rough = fit_prior_surrogate(*eval, prior, 1, 3);
  const FeasibleSetEstimate all = feasible_set_measure(p, rough, 0.0, samples);
  CHECK(all.fraction == 1.0);
  CHECK(all.standard_error == 0.0);
  CHECK_THROWS_AS(feasible_set_measure(p, rough, 0.1, Eigen::MatrixXd(0, 2)), InputError);
}

TEST_CASE("relative L2") {
  CHECK(relative_l2(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 1.0)) == 0.0);
  CHECK(relative_l2(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(3.0, 4.0)) == 1.0);
}
