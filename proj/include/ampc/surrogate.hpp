#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/basis.hpp"
#include "ampc/forward_model.hpp"
#include "ampc/prior.hpp"

namespace ampc {

struct SurrogateProvenance {
  std::uint64_t seed = 0;
  std::int64_t design_size = 0;
  std::vector<double> fit_residuals;
  std::uint64_t hf_evaluations = 0;
  int generation = 0;
  std::string model_id;
};

/// Polynomial-chaos expansion sum_m c_m Phi_m(zhat), zhat the physical point
/// mapped to the reference domain. Coefficients are M x n_d, one row per
/// multi-index in index-set order.
class PcSurrogate {
public:
  PcSurrogate(BasisFamily family, MultiIndexSet index_set, Eigen::MatrixXd coefficients,
              PriorMap prior_map, SurrogateProvenance provenance = {});

  BasisFamily family() const { return family_; }
  const MultiIndexSet& index_set() const { return index_set_; }
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const PriorMap& prior_map() const { return prior_map_; }
  const SurrogateProvenance& provenance() const { return provenance_; }
  SurrogateProvenance& provenance() { return provenance_; }

  int order() const { return index_set_.order(); }
  int n_params() const { return index_set_.dimension(); }
  int n_outputs() const { return static_cast<int>(coefficients_.cols()); }

  /// Evaluate at a physical parameter point.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;
  /// Evaluate at a point already in reference coordinates.
  Eigen::VectorXd evaluate_reference(const Eigen::VectorXd& zhat) const;

private:
  BasisFamily family_;
  MultiIndexSet index_set_;
  Eigen::MatrixXd coefficients_;
  PriorMap prior_map_;
  SurrogateProvenance provenance_;
};

/// Coefficient of m is u^L_m + u^C_m on the correction's index set and u^L_m
/// elsewhere. The correction's index set must be a prefix of the low one.
PcSurrogate merge(const PcSurrogate& low, const PcSurrogate& correction);

/// A surrogate exposed through the ForwardModel contract.
class SurrogateModel final : public ForwardModel {
public:
  SurrogateModel(std::shared_ptr<const PcSurrogate> surrogate, std::string id = "surrogate");

  int n_params() const override { return surrogate_->n_params(); }
  int n_outputs() const override { return surrogate_->n_outputs(); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const override {
    return surrogate_->evaluate(z);
  }
  std::string id() const override { return id_; }
  CostClass cost_class() const override { return CostClass::Cheap; }
  std::shared_ptr<const ForwardModel> refined(int) const override;

private:
  std::shared_ptr<const PcSurrogate> surrogate_;
  std::string id_;
};

inline constexpr int kSurrogateFormatVersion = 1;

nlohmann::json to_json(const PcSurrogate& surrogate);
PcSurrogate surrogate_from_json(const nlohmann::json& j);

void save_surrogate(const PcSurrogate& surrogate, const std::string& path);
PcSurrogate load_surrogate(const std::string& path);

} // namespace ampc
