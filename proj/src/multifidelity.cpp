#include "ampc/multifidelity.hpp"

#include <random>

#include "ampc/design.hpp"
#include "ampc/error.hpp"
#include "ampc/regression.hpp"

namespace ampc {

MultiFidelitySurrogate::MultiFidelitySurrogate(PcSurrogate low, PcSurrogate correction,
                                               int generation)
    : low_(std::move(low)), correction_(std::move(correction)), merged_(merge(low_, correction_)),
      generation_(generation) {
  merged_.provenance().generation = generation_;
}

Eigen::Index correction_design_size(int n_z, int correction_order) {
  return 2 * static_cast<Eigen::Index>(total_degree_cardinality(n_z, correction_order));
}

MultiFidelitySurrogate build_multifidelity(const PcSurrogate& low, const ModelEvaluator& high,
                                           const PriorSpec& prior, int correction_order,
                                           const Eigen::VectorXd& center, double radius,
                                           std::uint64_t seed) {
  const int n_z = low.n_params();
  if (correction_order < 0 || correction_order > low.order()) {
    throw InputError("correction order N_C = " + std::to_string(correction_order) +
                     " must lie in [0, N = " + std::to_string(low.order()) + "]");
  }
  if (!(radius > 0.0)) throw InputError("refinement radius must be positive");
  if (center.size() != n_z) throw InputError("refinement center has the wrong dimension");
  if (prior.dimension() != n_z) throw InputError("prior dimension does not match the surrogate");
  if (high.model().n_outputs() != low.n_outputs()) {
    throw InputError("high-fidelity output dimension does not match the surrogate");
  }

  auto set = total_degree_index_set(n_z, correction_order);
  const Eigen::Index q = correction_design_size(n_z, correction_order);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd physical(q, n_z);
  for (Eigen::Index i = 0; i < q; ++i) {
    Eigen::VectorXd x(n_z);
    for (int k = 0; k < n_z; ++k) x[k] = center[k] + radius * unif(rng);
    physical.row(i) = prior.clamp(x).transpose();
  }

  DesignSet design;
  design.family = low.family();
  design.order = correction_order;
  design.points.resize(q, n_z);
  for (Eigen::Index i = 0; i < q; ++i) {
    design.points.row(i) = low.prior_map().to_reference(physical.row(i).transpose()).transpose();
  }
  design.weights = compute_weights(design.family, set, design.points);

  const Eigen::MatrixXd high_values = high.evaluate_rows(physical, EvalCategory::Refinement);
  Eigen::MatrixXd differences(q, low.n_outputs());
  for (Eigen::Index i = 0; i < q; ++i) {
    differences.row(i) = high_values.row(i) - low.evaluate(physical.row(i).transpose()).transpose();
  }

  LsqReport report;
  try {
    report = fit_weighted_lsq(design.family, set, design, differences);
  } catch (const DegeneracyError& e) {
    throw DegeneracyError("degenerate correction design around y = " + format_point(center) +
                          " with R = " + std::to_string(radius) + ": " + e.what());
  }

  SurrogateProvenance provenance;
  provenance.seed = seed;
  provenance.design_size = q;
  provenance.fit_residuals.assign(report.residual_norm.data(),
                                  report.residual_norm.data() + report.residual_norm.size());
  provenance.hf_evaluations = static_cast<std::uint64_t>(q);
  provenance.model_id = high.model().id();
  PcSurrogate correction(low.family(), std::move(set), std::move(report.coefficients),
                         low.prior_map(), std::move(provenance));

  MultiFidelitySurrogate result(low, std::move(correction), low.provenance().generation + 1);
  result.design_points = std::move(physical);
  result.differences = std::move(differences);
  return result;
}

} // namespace ampc
