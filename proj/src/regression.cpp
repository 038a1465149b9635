#include "ampc/regression.hpp"

#include <cmath>

#include "ampc/error.hpp"

namespace ampc {

LsqReport fit_weighted_lsq(BasisFamily family, const MultiIndexSet& set, const DesignSet& design,
                           const Eigen::MatrixXd& values) {
  const Eigen::Index q = design.points.rows();
  const auto m = static_cast<Eigen::Index>(set.size());
  if (design.points.cols() != set.dimension()) {
    throw InputError("design dimension does not match the index set");
  }
  if (design.weights.size() != q) throw InputError("design weights do not match design points");
  if (values.rows() != q) {
    throw InputError("value rows (" + std::to_string(values.rows()) +
                     ") must equal the design size (" + std::to_string(q) + ")");
  }
  if (q < m) {
    throw DegeneracyError("design has " + std::to_string(q) + " points but the basis has " +
                          std::to_string(m) + " functions");
  }
  if (!values.allFinite()) throw InputError("least-squares right-hand side is not finite");

  const Eigen::VectorXd sqrt_w = design.weights.array().sqrt();
  const Eigen::MatrixXd a = sqrt_w.asDiagonal() * vandermonde(family, set, design.points);
  const Eigen::MatrixXd b = sqrt_w.asDiagonal() * values;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > kRankTolerance * s_max) ++rank;
  }
  if (rank < m) {
    throw DegeneracyError("weighted Vandermonde matrix has rank " + std::to_string(rank) +
                          " < " + std::to_string(m) + " basis functions (deficiency " +
                          std::to_string(m - rank) + ")");
  }

  LsqReport report;
  report.rank = rank;
  report.condition_estimate = s_max / s[s.size() - 1];
  const Eigen::MatrixXd utb = svd.matrixU().transpose() * b;
  report.coefficients = svd.matrixV() * (s.cwiseInverse().asDiagonal() * utb);
  report.residual_norm = (a * report.coefficients - b).colwise().norm().transpose();
  return report;
}

PcSurrogate fit_prior_surrogate(const ModelEvaluator& model, const PriorSpec& prior, int order,
                                std::uint64_t seed) {
  if (model.model().n_params() != prior.dimension()) {
    throw InputError("model parameter count does not match the prior dimension");
  }
  const BasisFamily family = prior.family();
  const PriorMap map = prior.reference_map();
  auto set = total_degree_index_set(prior.dimension(), order);
  const DesignSet design = make_design(family, set, oversampled_size(set), seed);
  const Eigen::MatrixXd physical = map.rows_from_reference(design.points);

  const auto before = model.ledger().snapshot()[EvalCategory::Offline];
  const Eigen::MatrixXd values = model.evaluate_rows(physical, EvalCategory::Offline);
  const auto after = model.ledger().snapshot()[EvalCategory::Offline];

  LsqReport report = fit_weighted_lsq(family, set, design, values);
  SurrogateProvenance provenance;
  provenance.seed = seed;
  provenance.design_size = design.size();
  provenance.fit_residuals.assign(report.residual_norm.data(),
                                  report.residual_norm.data() + report.residual_norm.size());
  provenance.hf_evaluations = after - before;
  provenance.model_id = model.model().id();
  return PcSurrogate(family, std::move(set), std::move(report.coefficients), map,
                     std::move(provenance));
}

} // namespace ampc
