#pragma once

#include <memory>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/forward_model.hpp"
#include "ampc/prior.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

/// Known noise level, or an inverse-Gamma(shape, scale) prior on sigma^2.
struct NoiseModel {
  enum class Kind { KnownSigma, HierarchicalSigma };
  Kind kind = Kind::KnownSigma;
  double sigma = 1.0;
  double shape = 1e-3;
  double scale = 1e-3;

  static NoiseModel known(double sigma);
  static NoiseModel hierarchical(double shape = 1e-3, double scale = 1e-3);
  bool is_hierarchical() const { return kind == Kind::HierarchicalSigma; }
};

/// Gaussian i.i.d. log-likelihood -n_d log(sigma sqrt(2 pi)) - |d - G|^2 / (2 sigma^2).
double log_likelihood(const Eigen::VectorXd& data, const Eigen::VectorXd& forward_output, double sigma);

/// Psi(z; d) = |G(z) - d|^2 / (2 sigma^2).
double potential(const Eigen::VectorXd& data, const Eigen::VectorXd& forward_output, double sigma);

/// Log density of s = log sigma^2 when sigma^2 ~ inverse-Gamma(shape, scale),
/// Jacobian of the transform included.
double log_inverse_gamma_in_log_variance(double log_variance, double shape, double scale);

/// Model + prior + data + noise. The MH state is z, extended by log sigma^2
/// when the noise level is hierarchical.
class InverseProblem {
public:
  InverseProblem(std::shared_ptr<const ModelEvaluator> model, PriorSpec prior, Eigen::VectorXd data,
                 NoiseModel noise);

  const ModelEvaluator& model() const { return *model_; }
  std::shared_ptr<const ModelEvaluator> model_ptr() const { return model_; }
  const PriorSpec& prior() const { return prior_; }
  const Eigen::VectorXd& data() const { return data_; }
  const NoiseModel& noise() const { return noise_; }

  int parameter_dimension() const { return prior_.dimension(); }
  int state_dimension() const { return prior_.dimension() + (noise_.is_hierarchical() ? 1 : 0); }

  Eigen::VectorXd parameters(const Eigen::VectorXd& state) const {
    return state.head(parameter_dimension());
  }
  double sigma(const Eigen::VectorXd& state) const;

  bool in_support(const Eigen::VectorXd& state) const;
  double log_prior(const Eigen::VectorXd& state) const;
  double log_posterior_given(const Eigen::VectorXd& state, const Eigen::VectorXd& forward_output) const;

  /// Exact posterior: one (ledgered) high-fidelity evaluation when in support.
  double log_posterior(const Eigen::VectorXd& state, EvalCategory category) const;
  /// Surrogate-induced posterior; no high-fidelity evaluation.
  double log_posterior(const Eigen::VectorXd& state, const PcSurrogate& surrogate) const;

private:
  std::shared_ptr<const ModelEvaluator> model_;
  PriorSpec prior_;
  Eigen::VectorXd data_;
  NoiseModel noise_;
};

} // namespace ampc
