#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "ampc/forward_model.hpp"
#include "ampc/prior.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

/// Low-fidelity expansion of order N, additive correction of order N_C <= N
/// and their merge. The constructor rejects corrections whose index set is
/// not a prefix of the low-fidelity one, so N_C > N cannot be represented.
class MultiFidelitySurrogate {
public:
  MultiFidelitySurrogate(PcSurrogate low, PcSurrogate correction, int generation);

  const PcSurrogate& low() const { return low_; }
  const PcSurrogate& correction() const { return correction_; }
  const PcSurrogate& merged() const { return merged_; }
  int generation() const { return generation_; }

  /// Correction design: points, high-fidelity minus low-fidelity values.
  Eigen::MatrixXd design_points;
  Eigen::MatrixXd differences;

private:
  PcSurrogate low_;
  PcSurrogate correction_;
  PcSurrogate merged_;
  int generation_;
};

/// Q_C = 2 * C(N_C + n_z, n_z).
Eigen::Index correction_design_size(int n_z, int correction_order);

/// One refinement: draw Q_C points x_i = center + R xi_i with xi_i uniform on
/// [-1,1]^n_z (clamped into the prior box for bounded coordinates), fit the
/// discrepancy high - low over the order-N_C total-degree set in the shared
/// global basis, and merge. High-fidelity calls are ledgered as refinement.
MultiFidelitySurrogate build_multifidelity(const PcSurrogate& low, const ModelEvaluator& high,
                                           const PriorSpec& prior, int correction_order,
                                           const Eigen::VectorXd& center, double radius,
                                           std::uint64_t seed);

} // namespace ampc
