#include "ampc/bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ampc/error.hpp"

namespace ampc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

NoiseModel NoiseModel::known(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("noise sigma must be positive");
  NoiseModel n;
  n.kind = Kind::KnownSigma;
  n.sigma = sigma;
  return n;
}

NoiseModel NoiseModel::hierarchical(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw InputError("inverse-Gamma shape and scale must be positive");
  }
  NoiseModel n;
  n.kind = Kind::HierarchicalSigma;
  n.shape = shape;
  n.scale = scale;
  return n;
}

double potential(const Eigen::VectorXd& data, const Eigen::VectorXd& forward_output, double sigma) {
  if (!(sigma > 0.0)) throw InputError("noise sigma must be positive");
  if (data.size() != forward_output.size()) {
    throw InputError("forward output length " + std::to_string(forward_output.size()) +
                     " does not match data length " + std::to_string(data.size()));
  }
  return (data - forward_output).squaredNorm() / (2.0 * sigma * sigma);
}

double log_likelihood(const Eigen::VectorXd& data, const Eigen::VectorXd& forward_output, double sigma) {
  const double psi = potential(data, forward_output, sigma);
  const double n_d = static_cast<double>(data.size());
  return -n_d * std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - psi;
}

double log_inverse_gamma_in_log_variance(double log_variance, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - shape * log_variance -
         scale * std::exp(-log_variance);
}

InverseProblem::InverseProblem(std::shared_ptr<const ModelEvaluator> model, PriorSpec prior,
                               Eigen::VectorXd data, NoiseModel noise)
    : model_(std::move(model)), prior_(std::move(prior)), data_(std::move(data)), noise_(noise) {
  if (!model_) throw InputError("inverse problem needs a forward model");
  if (model_->model().n_params() != prior_.dimension()) {
    throw InputError("model has " + std::to_string(model_->model().n_params()) +
                     " parameters but the prior has dimension " + std::to_string(prior_.dimension()));
  }
  if (data_.size() != model_->model().n_outputs()) {
    throw InputError("data length " + std::to_string(data_.size()) +
                     " does not match model output dimension " +
                     std::to_string(model_->model().n_outputs()));
  }
  if (!data_.allFinite()) throw InputError("data contain non-finite values");
}

double InverseProblem::sigma(const Eigen::VectorXd& state) const {
  if (!noise_.is_hierarchical()) return noise_.sigma;
  return std::exp(0.5 * state[parameter_dimension()]);
}

bool InverseProblem::in_support(const Eigen::VectorXd& state) const {
  if (state.size() != state_dimension()) return false;
  if (noise_.is_hierarchical() && !std::isfinite(state[parameter_dimension()])) return false;
  return prior_.in_support(state);
}

double InverseProblem::log_prior(const Eigen::VectorXd& state) const {
  if (!in_support(state)) return kNegInf;
  double lp = prior_.log_density(parameters(state));
  if (noise_.is_hierarchical()) {
    lp += log_inverse_gamma_in_log_variance(state[parameter_dimension()], noise_.shape, noise_.scale);
  }
  return lp;
}

double InverseProblem::log_posterior_given(const Eigen::VectorXd& state,
                                           const Eigen::VectorXd& forward_output) const {
  const double lp = log_prior(state);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(data_, forward_output, sigma(state));
}

double InverseProblem::log_posterior(const Eigen::VectorXd& state, EvalCategory category) const {
  if (!in_support(state)) return kNegInf;
  return log_posterior_given(state, model_->evaluate(parameters(state), category));
}

double InverseProblem::log_posterior(const Eigen::VectorXd& state,
                                     const PcSurrogate& surrogate) const {
  if (!in_support(state)) return kNegInf;
  return log_posterior_given(state, surrogate.evaluate(parameters(state)));
}

} // namespace ampc
