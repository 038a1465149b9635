#include <cmath>
#include <random>
#include <sstream>

#include "ampc/error.hpp"
#include "ampc/models.hpp"

namespace ampc {

std::shared_ptr<const ForwardModel> make_linear_model(Eigen::MatrixXd a, Eigen::VectorXd c) {
  if (a.rows() != c.size()) throw InputError("linear model: A rows must match c length");
  if (a.rows() < 1 || a.cols() < 1) throw InputError("linear model: A must be non-empty");
  std::ostringstream id;
  id.precision(17);
  id << "linear(" << a.rows() << "x" << a.cols() << ":";
  for (Eigen::Index i = 0; i < a.size(); ++i) id << a.data()[i] << ",";
  for (Eigen::Index i = 0; i < c.size(); ++i) id << c[i] << ",";
  id << ")";
  const auto rows = static_cast<int>(a.rows());
  const auto cols = static_cast<int>(a.cols());
  return std::make_shared<FunctionModel>(
      id.str(), cols, rows,
      [a = std::move(a), c = std::move(c)](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        return a * z + c;
      });
}

std::shared_ptr<const ForwardModel> make_polynomial_model(int n_z, std::vector<Monomial> terms) {
  std::ostringstream id;
  id.precision(17);
  id << "polynomial(" << n_z << ":";
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != n_z) {
      throw InputError("polynomial model: monomial exponent count must equal n_z");
    }
    id << t.coefficient << "*[";
    for (int e : t.exponents) {
      if (e < 0) throw InputError("polynomial model: negative exponent");
      id << e << ' ';
    }
    id << "]";
  }
  id << ")";
  return std::make_shared<FunctionModel>(
      id.str(), n_z, 1, [terms = std::move(terms)](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        double sum = 0.0;
        for (const auto& t : terms) {
          double v = t.coefficient;
          for (std::size_t i = 0; i < t.exponents.size(); ++i) {
            v *= std::pow(z[static_cast<Eigen::Index>(i)], t.exponents[i]);
          }
          sum += v;
        }
        return Eigen::VectorXd::Constant(1, sum);
      });
}

std::shared_ptr<const ForwardModel> make_exp_sum_model(int n_z, double scale) {
  std::ostringstream id;
  id.precision(17);
  id << "exp_sum(" << n_z << "," << scale << ")";
  return std::make_shared<FunctionModel>(id.str(), n_z, 1,
                                         [scale](const Eigen::VectorXd& z) -> Eigen::VectorXd {
                                           return Eigen::VectorXd::Constant(1, scale * std::exp(z.sum()));
                                         });
}

GaussianPosterior linear_gaussian_posterior(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                                            const Eigen::VectorXd& data, double sigma,
                                            const Eigen::VectorXd& prior_mean,
                                            const Eigen::MatrixXd& prior_covariance) {
  if (!(sigma > 0.0)) throw InputError("noise standard deviation must be positive");
  const Eigen::MatrixXd prior_precision = prior_covariance.inverse();
  const Eigen::MatrixXd precision = prior_precision + a.transpose() * a / (sigma * sigma);
  GaussianPosterior post;
  post.covariance = precision.inverse();
  post.mean = post.covariance *
              (prior_precision * prior_mean + a.transpose() * (data - c) / (sigma * sigma));
  return post;
}

SyntheticData generate_synthetic_data(const ForwardModel& model, const Eigen::VectorXd& true_params,
                                      const NoiseSpec& noise, int fine_factor, std::uint64_t seed) {
  if (noise.level < 0.0) throw InputError("noise level must be non-negative");
  const auto fine = model.refined(fine_factor);
  SyntheticData out;
  out.clean = fine->evaluate(true_params);
  const double scale = noise.kind == NoiseSpec::Kind::Gaussian
                           ? noise.level
                           : out.clean.cwiseAbs().maxCoeff() * noise.level;
  out.sigma_effective = scale;
  out.data = out.clean;
  if (scale > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < out.data.size(); ++j) out.data[j] += scale * normal(rng);
  }
  return out;
}

} // namespace ampc
