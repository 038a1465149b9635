#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ampc/basis.hpp"
#include "ampc/design.hpp"
#include "ampc/forward_model.hpp"
#include "ampc/prior.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

struct LsqReport {
  Eigen::MatrixXd coefficients;  // M x n_d
  Eigen::VectorXd residual_norm; // weighted residual per output
  double condition_estimate = 0.0;
  int rank = 0;
};

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-12;

/// argmin_x ||sqrt(W) (Phi x - b)||_2 per column of `values`, solved through
/// an SVD of sqrt(W) Phi. Throws DegeneracyError when rank < M.
LsqReport fit_weighted_lsq(BasisFamily family, const MultiIndexSet& set,
                           const DesignSet& design, const Eigen::MatrixXd& values);

/// Build the prior-based surrogate of order N: a 2M-point design drawn in the
/// reference domain, mapped to physical coordinates, evaluated through
/// `model` (ledgered as offline) and fitted per output.
PcSurrogate fit_prior_surrogate(const ModelEvaluator& model, const PriorSpec& prior, int order,
                                std::uint64_t seed);

} // namespace ampc
