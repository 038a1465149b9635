#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/basis.hpp"

namespace ampc {

/// Least-squares design in reference coordinates with its preconditioning
/// weights w_i = M / sum_m Phi_m(z_i)^2.
struct DesignSet {
  Eigen::MatrixXd points; // Q x n_z
  Eigen::VectorXd weights;
  BasisFamily family = BasisFamily::LegendreUniform;
  int order = 0;

  Eigen::Index size() const { return points.rows(); }
};

/// Q i.i.d. draws from the tensor-product Chebyshev (arcsine) density on
/// [-1,1]^n_z, coordinate-wise cos(pi U).
Eigen::MatrixXd sample_chebyshev_design(int n_z, Eigen::Index count, std::uint64_t seed);

/// Q i.i.d. uniform draws on the Euclidean ball of radius sqrt(2N).
Eigen::MatrixXd sample_ball_design(int n_z, int order, Eigen::Index count, std::uint64_t seed);

Eigen::VectorXd compute_weights(BasisFamily family, const MultiIndexSet& set,
                                const Eigen::MatrixXd& points);

/// Oversampled design for a prior surrogate: Chebyshev for Legendre, ball for
/// Hermite, with weights against `set`.
DesignSet make_design(BasisFamily family, const MultiIndexSet& set, Eigen::Index count,
                      std::uint64_t seed);

/// Number of design points used per fit: Q = 2M.
Eigen::Index oversampled_size(const MultiIndexSet& set);

nlohmann::json to_json(const DesignSet& design);
DesignSet design_from_json(const nlohmann::json& j);

} // namespace ampc
