#include "ampc/design.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ampc/error.hpp"

namespace ampc {

namespace {

// Uniform draw strictly inside (0,1).
double open_unit(std::mt19937_64& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 64>(rng);
    if (u > 0.0) return u;
  }
}

} // namespace

Eigen::MatrixXd sample_chebyshev_design(int n_z, Eigen::Index count, std::uint64_t seed) {
  if (n_z < 1) throw InputError("design dimension must be at least 1");
  if (count < 1) throw InputError("design size must be at least 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd points(count, n_z);
  for (Eigen::Index q = 0; q < count; ++q) {
    for (int i = 0; i < n_z; ++i) points(q, i) = std::cos(std::numbers::pi * open_unit(rng));
  }
  return points;
}

Eigen::MatrixXd sample_ball_design(int n_z, int order, Eigen::Index count, std::uint64_t seed) {
  if (n_z < 1) throw InputError("design dimension must be at least 1");
  if (count < 1) throw InputError("design size must be at least 1");
  if (order < 1) throw InputError("ball design needs order N >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double radius = std::sqrt(2.0 * order);
  Eigen::MatrixXd points(count, n_z);
  Eigen::VectorXd direction(n_z);
  for (Eigen::Index q = 0; q < count; ++q) {
    double norm = 0.0;
    do {
      for (int i = 0; i < n_z; ++i) direction[i] = normal(rng);
      norm = direction.norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(open_unit(rng), 1.0 / n_z);
    points.row(q) = (r / norm) * direction.transpose();
  }
  return points;
}

Eigen::VectorXd compute_weights(BasisFamily family, const MultiIndexSet& set,
                                const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd phi = vandermonde(family, set, points);
  const double m = static_cast<double>(set.size());
  Eigen::VectorXd w(points.rows());
  for (Eigen::Index q = 0; q < points.rows(); ++q) w[q] = m / phi.row(q).squaredNorm();
  return w;
}

DesignSet make_design(BasisFamily family, const MultiIndexSet& set, Eigen::Index count,
                      std::uint64_t seed) {
  DesignSet design;
  design.family = family;
  design.order = set.order();
  if (family == BasisFamily::LegendreUniform) {
    design.points = sample_chebyshev_design(set.dimension(), count, seed);
  } else {
    // The ball radius sqrt(2N) degenerates at N = 0; use the N = 1 ball there.
    design.points = sample_ball_design(set.dimension(), std::max(set.order(), 1), count, seed);
  }
  design.weights = compute_weights(family, set, design.points);
  return design;
}

Eigen::Index oversampled_size(const MultiIndexSet& set) {
  return 2 * static_cast<Eigen::Index>(set.size());
}

nlohmann::json to_json(const DesignSet& design) {
  nlohmann::json points = nlohmann::json::array();
  for (Eigen::Index q = 0; q < design.points.rows(); ++q) {
    std::vector<double> row(static_cast<std::size_t>(design.points.cols()));
    for (Eigen::Index i = 0; i < design.points.cols(); ++i) {
      row[static_cast<std::size_t>(i)] = design.points(q, i);
    }
    points.push_back(row);
  }
  std::vector<double> weights(design.weights.data(), design.weights.data() + design.weights.size());
  return {{"family", to_string(design.family)},
          {"order", design.order},
          {"points", points},
          {"weights", weights}};
}

DesignSet design_from_json(const nlohmann::json& j) {
  DesignSet design;
  design.family = basis_family_from_string(j.at("family").get<std::string>());
  design.order = j.at("order").get<int>();
  const auto& points = j.at("points");
  const auto weights = j.at("weights").get<std::vector<double>>();
  const auto q = static_cast<Eigen::Index>(points.size());
  const auto n_z = q > 0 ? static_cast<Eigen::Index>(points[0].size()) : 0;
  design.points.resize(q, n_z);
  for (Eigen::Index r = 0; r < q; ++r) {
    const auto row = points[static_cast<std::size_t>(r)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != n_z) throw InputError("ragged design points");
    for (Eigen::Index i = 0; i < n_z; ++i) design.points(r, i) = row[static_cast<std::size_t>(i)];
  }
  if (static_cast<Eigen::Index>(weights.size()) != q) {
    throw InputError("design weight count does not match point count");
  }
  design.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), q);
  return design;
}

} // namespace ampc
