#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ampc/design.hpp"
#include "ampc/error.hpp"

using namespace ampc;

namespace {

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  return d;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

} // namespace

TEST_CASE("Chebyshev design follows the arcsine law") {
  const Eigen::MatrixXd pts = sample_chebyshev_design(2, 100000, 11);
  CHECK(pts.cwiseAbs().maxCoeff() < 1.0);
  auto arcsine = [](double z) { return 2.0 / std::numbers::pi * std::asin(std::sqrt((z + 1.0) / 2.0)); };
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(ks_distance(column(pts, j), arcsine) < 0.01);
  CHECK(sample_chebyshev_design(2, 50, 3) == sample_chebyshev_design(2, 50, 3));
  CHECK(sample_chebyshev_design(2, 50, 3) != sample_chebyshev_design(2, 50, 4));
}

TEST_CASE("ball design is uniform on the radius sqrt(2N) ball") {
  const Eigen::MatrixXd pts = sample_ball_design(3, 2, 100000, 5);
  CHECK(pts.rowwise().norm().maxCoeff() <= 2.0 + 1e-12);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(pts.col(j).mean()) < 0.02);
  // Radial CDF of the uniform ball: (r / R)^n_z.
  std::vector<double> radii(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) radii[static_cast<std::size_t>(i)] = pts.row(i).norm();
  CHECK(ks_distance(radii, [](double r) { return std::pow(r / 2.0, 3); }) < 0.01);

  const Eigen::MatrixXd line = sample_ball_design(1, 2, 100000, 9);
  CHECK(ks_distance(column(line, 0), [](double z) { return (z + 2.0) / 4.0; }) < 0.01);
  CHECK_THROWS_AS(sample_ball_design(2, 0, 10, 1), InputError);
  CHECK(sample_ball_design(4, 3, 20, 8) == sample_ball_design(4, 3, 20, 8));
}

TEST_CASE("preconditioning weights") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(30, 2);
  const Eigen::VectorXd w0 = compute_weights(BasisFamily::LegendreUniform, total_degree_index_set(2, 0), pts);
  CHECK((w0.array() == 1.0).all());

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::VectorXd w1 = compute_weights(BasisFamily::LegendreUniform, total_degree_index_set(1, 1), zero);
  CHECK(w1[0] == doctest::Approx(2.0));

  for (auto family : {BasisFamily::LegendreUniform, BasisFamily::HermiteGaussian}) {
    const auto set = total_degree_index_set(2, 3);
    const Eigen::VectorXd w = compute_weights(family, set, pts);
    const Eigen::MatrixXd v = vandermonde(family, set, pts);
    CHECK((w.array() > 0.0).all());
    const double identity = (w.array() * v.rowwise().squaredNorm().array()).sum();
    CHECK(identity == doctest::Approx(30.0 * static_cast<double>(set.size())).epsilon(1e-12));
  }
}

TEST_CASE("prior-surrogate designs") {
  const auto set = total_degree_index_set(2, 3);
  CHECK(oversampled_size(set) == 20);
  CHECK(oversampled_size(total_degree_index_set(9, 2)) == 110);
  CHECK(oversampled_size(total_degree_index_set(2, 6)) == 56);
  const DesignSet d = make_design(BasisFamily::LegendreUniform, set, 20, 1);
  CHECK(d.size() == 20);
  CHECK(d.order == 3);
  CHECK(d.points.cwiseAbs().maxCoeff() < 1.0);
  const DesignSet h = make_design(BasisFamily::HermiteGaussian, set, 20, 1);
  CHECK(h.points.rowwise().norm().maxCoeff() <= std::sqrt(6.0) + 1e-12);
  // An order-0 Hermite design still needs a non-degenerate ball.
  CHECK(make_design(BasisFamily::HermiteGaussian, total_degree_index_set(2, 0), 2, 1).size() == 2);
}

TEST_CASE("design JSON round-trip is exact") {
  const DesignSet d = make_design(BasisFamily::HermiteGaussian, total_degree_index_set(3, 2), 20, 42);
  const DesignSet back = design_from_json(nlohmann::json::parse(to_json(d).dump()));
  CHECK(back.points == d.points);
  CHECK(back.weights == d.weights);
  CHECK(back.family == d.family);
  CHECK(back.order == d.order);
}
