#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/basis.hpp"

namespace ampc {

/// Affine change of variables z = shift + scale * zhat between physical
/// parameters and the reference domain of a basis family.
struct AffineMap {
  double shift = 0.0;
  double scale = 1.0;

  double to_reference(double z) const { return (z - shift) / scale; }
  double from_reference(double zhat) const { return shift + scale * zhat; }

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// Coordinate-wise affine map of a whole parameter vector.
class PriorMap {
public:
  PriorMap() = default;
  explicit PriorMap(std::vector<AffineMap> maps) : maps_(std::move(maps)) {}

  std::size_t dimension() const { return maps_.size(); }
  const AffineMap& operator[](std::size_t i) const { return maps_[i]; }
  const std::vector<AffineMap>& maps() const { return maps_; }

  Eigen::VectorXd to_reference(const Eigen::VectorXd& z) const;
  Eigen::VectorXd from_reference(const Eigen::VectorXd& zhat) const;
  Eigen::MatrixXd rows_from_reference(const Eigen::MatrixXd& zhat) const;

  static PriorMap identity(std::size_t dimension);

  friend bool operator==(const PriorMap&, const PriorMap&) = default;

private:
  std::vector<AffineMap> maps_;
};

struct PriorMarginal {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double a = 0.0; // lower bound, or mean
  double b = 1.0; // upper bound, or standard deviation

  static PriorMarginal uniform(double lower, double upper);
  static PriorMarginal gaussian(double mean, double sd);
};

/// Product prior with mutually independent marginals. All marginals must be
/// of one kind so that a single orthonormal family covers the joint density.
class PriorSpec {
public:
  PriorSpec() = default;
  explicit PriorSpec(std::vector<PriorMarginal> marginals);

  static PriorSpec uniform_box(int dimension, double lower, double upper);
  static PriorSpec standard_gaussian(int dimension);

  int dimension() const { return static_cast<int>(marginals_.size()); }
  const std::vector<PriorMarginal>& marginals() const { return marginals_; }

  BasisFamily family() const;
  PriorMap reference_map() const;

  bool in_support(const Eigen::VectorXd& z) const;
  /// Normalized log density; -inf outside the support.
  double log_density(const Eigen::VectorXd& z) const;
  /// Clamp into the support (a no-op for Gaussian coordinates).
  Eigen::VectorXd clamp(const Eigen::VectorXd& z) const;
  Eigen::VectorXd sample(std::mt19937_64& rng) const;

private:
  std::vector<PriorMarginal> marginals_;
};

nlohmann::json to_json(const PriorMap& map);
PriorMap prior_map_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PriorSpec& prior);
PriorSpec prior_spec_from_json(const nlohmann::json& j);

} // namespace ampc
