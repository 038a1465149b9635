#include <doctest.h>

#include <random>

#include "ampc/error.hpp"
#include "ampc/models.hpp"
#include "ampc/regression.hpp"

using namespace ampc;

namespace {

Eigen::MatrixXd uniform_points(int n_z, int count, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(count, n_z);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

} // namespace

TEST_CASE("a single basis function is recovered as a unit vector") {
  const auto set = total_degree_index_set(2, 3);
  const DesignSet d = make_design(BasisFamily::LegendreUniform, set, oversampled_size(set), 3);
  const Eigen::MatrixXd v = vandermonde(BasisFamily::LegendreUniform, set, d.points);
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    const LsqReport r = fit_weighted_lsq(BasisFamily::LegendreUniform, set, d, v.col(k));
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(v.cols());
    unit[k] = 1.0;
    CHECK((r.coefficients.col(0) - unit).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.residual_norm[0] < 1e-10);
    CHECK(r.rank == static_cast<int>(set.size()));
  }
}

TEST_CASE("zero data gives zero coefficients") {
  const auto set = total_degree_index_set(3, 2);
  const DesignSet d = make_design(BasisFamily::HermiteGaussian, set, oversampled_size(set), 9);
  const LsqReport r = fit_weighted_lsq(BasisFamily::HermiteGaussian, set, d, Eigen::MatrixXd::Zero(d.size(), 2));
  CHECK(r.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.residual_norm.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a cubic in two variables is reproduced at fresh points") {
  auto model = make_polynomial_model(2, {{{0, 0}, 3.0}, {{1, 0}, 2.0}, {{1, 1}, -1.0}});
  ModelEvaluator eval(model);
  const PcSurrogate s = fit_prior_surrogate(eval, PriorSpec::uniform_box(2, -1.0, 1.0), 3, 17);
  const Eigen::MatrixXd pts = uniform_points(2, 1000, 5);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double z1 = pts(i, 0), z2 = pts(i, 1);
    worst = std::max(worst, std::abs(s.evaluate(pts.row(i).transpose())[0] - (3.0 + 2.0 * z1 - z1 * z2)));
  }
  CHECK(worst < 1e-8);
  CHECK(eval.ledger().snapshot()[EvalCategory::Offline] == 20);
  CHECK(s.provenance().design_size == 20);
  CHECK(s.provenance().seed == 17);
}

TEST_CASE("recovery on a shifted box and under a scaled Gaussian prior") {
  auto model = make_polynomial_model(2, {{{2, 0}, 1.5}, {{0, 1}, -4.0}, {{0, 0}, 0.25}});
  ModelEvaluator eval(model);
  const PriorSpec box({PriorMarginal::uniform(0.0, 1.0), PriorMarginal::uniform(2.0, 5.0)});
  const PcSurrogate s = fit_prior_surrogate(eval, box, 2, 4);
  const PriorSpec gauss({PriorMarginal::gaussian(1.0, 2.0), PriorMarginal::gaussian(-3.0, 0.5)});
  const PcSurrogate g = fit_prior_surrogate(eval, gauss, 2, 4);
  for (const auto& row : {Eigen::Vector2d(0.3, 2.5), Eigen::Vector2d(0.9, 4.9), Eigen::Vector2d(-2.0, 7.0)}) {
    const double truth = 1.5 * row[0] * row[0] - 4.0 * row[1] + 0.25;
    CHECK(std::abs(s.evaluate(row)[0] - truth) < 1e-9);
    CHECK(std::abs(g.evaluate(row)[0] - truth) < 1e-8);
  }
}

TEST_CASE("constant model keeps only the zero-index coefficient") {
  auto model = std::make_shared<FunctionModel>("const", 3, 2, [](const Eigen::VectorXd&) {
    return Eigen::Vector2d(7.0, -2.0).eval();
  });
  ModelEvaluator eval(model);
  const PcSurrogate s = fit_prior_surrogate(eval, PriorSpec::standard_gaussian(3), 2, 1);
  CHECK(s.coefficients()(0, 0) == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(s.coefficients()(0, 1) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(s.coefficients().bottomRows(s.coefficients().rows() - 1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("weights do not change the solution of a consistent system") {
  const auto set = total_degree_index_set(2, 2);
  DesignSet d = make_design(BasisFamily::LegendreUniform, set, 12, 21);
  const Eigen::MatrixXd v = vandermonde(BasisFamily::LegendreUniform, set, d.points);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  const Eigen::VectorXd b = v * c;
  const LsqReport weighted = fit_weighted_lsq(BasisFamily::LegendreUniform, set, d, b);
  d.weights.setOnes();
  const LsqReport plain = fit_weighted_lsq(BasisFamily::LegendreUniform, set, d, b);
  CHECK((weighted.coefficients - plain.coefficients).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(weighted.condition_estimate < 1e6);
}

TEST_CASE("fits are deterministic") {
  auto model = make_exp_sum_model(2);
  ModelEvaluator a(model), b(model);
  const PcSurrogate sa = fit_prior_surrogate(a, PriorSpec::uniform_box(2, -1.0, 1.0), 4, 99);
  const PcSurrogate sb = fit_prior_surrogate(b, PriorSpec::uniform_box(2, -1.0, 1.0), 4, 99);
  CHECK(sa.coefficients() == sb.coefficients());
}

TEST_CASE("degenerate and malformed systems") {
  const auto set = total_degree_index_set(2, 2);
  DesignSet few = make_design(BasisFamily::LegendreUniform, set, 4, 1);
  CHECK_THROWS_AS(fit_weighted_lsq(BasisFamily::LegendreUniform, set, few, Eigen::VectorXd::Zero(4)),
                  DegeneracyError);
  DesignSet same = make_design(BasisFamily::LegendreUniform, set, 12, 1);
  for (Eigen::Index i = 0; i < same.size(); ++i) same.points.row(i) = same.points.row(0);
  CHECK_THROWS_AS(fit_weighted_lsq(BasisFamily::LegendreUniform, set, same, Eigen::VectorXd::Zero(12)),
                  DegeneracyError);
  DesignSet ok = make_design(BasisFamily::LegendreUniform, set, 12, 1);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(12);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(fit_weighted_lsq(BasisFamily::LegendreUniform, set, ok, bad), InputError);
}

TEST_CASE("forward failures name the design point") {
  auto model = std::make_shared<FunctionModel>("boom", 2, 1, [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    if (z[0] > 0.5) throw std::runtime_error("solver diverged");
    return Eigen::VectorXd::Zero(1);
  });
  ModelEvaluator eval(model);
  try {
    fit_prior_surrogate(eval, PriorSpec::uniform_box(2, 0.0, 1.0), 3, 1);
    FAIL("expected a model error");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("z = (") != std::string::npos);
    CHECK(std::string(e.what()).find("solver diverged") != std::string::npos);
  }
}

TEST_CASE("mixed priors are rejected") {
  ModelEvaluator eval(make_linear_model(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)));
  CHECK_THROWS_AS(PriorSpec({PriorMarginal::uniform(0.0, 1.0), PriorMarginal::gaussian(0.0, 1.0)}), InputError);
}
