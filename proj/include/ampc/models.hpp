#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/forward_model.hpp"

namespace ampc {

using Point2 = std::array<double, 2>;

/// n x n uniform sensor grid with spacing (hi - lo)/(n - 1).
std::vector<Point2> sensor_grid(int n, double lo, double hi);

// ---------------------------------------------------------------------------
// Time-fractional heat-source problem on [0,1]^2:
//   D_t^alpha u - lap u = amplitude * exp(-t) exp(-0.5 |Z - x|^2 / width^2),
// homogeneous Neumann boundary, u(x, 0) = 0. Parameters are the source
// location (Z1, Z2), optionally followed by alpha.

struct FractionalSourceConfig {
  double alpha = 0.8;
  int mesh = 33; // nodes per side
  double dt = 0.01;
  double source_width = 0.1;
  double amplitude = 1.0;
  std::vector<Point2> sensors = sensor_grid(3, 0.0, 1.0);
  std::vector<double> times = {0.25, 0.75};
  bool infer_alpha = false;

  /// 3x3 sensors, t in {0.25, 0.75}: 18 measurements, alpha = 0.8 known.
  static FractionalSourceConfig known_alpha();
  /// 5x5 sensors, t in {0.25, 0.75, 1}: 75 measurements, alpha inferred.
  static FractionalSourceConfig unknown_alpha();
};

class FractionalSourceModel final : public ForwardModel {
public:
  explicit FractionalSourceModel(FractionalSourceConfig config);

  int n_params() const override { return config_.infer_alpha ? 3 : 2; }
  int n_outputs() const override {
    return static_cast<int>(config_.sensors.size() * config_.times.size());
  }
  /// Outputs are time-major: entry t * n_sensors + s.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& params) const override;
  std::string id() const override;
  std::shared_ptr<const ForwardModel> refined(int factor) const override;

  const FractionalSourceConfig& config() const { return config_; }

  /// Sensor values for an explicit source location and fractional order.
  Eigen::VectorXd solve(double z1, double z2, double alpha) const;

private:
  struct Operator;
  std::shared_ptr<const Operator> factor_operator(double alpha) const;

  FractionalSourceConfig config_;
  std::shared_ptr<const Operator> fixed_operator_;
};

/// L1 weights b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..count-1.
std::vector<double> l1_weights(double alpha, int count);

// ---------------------------------------------------------------------------
// Elliptic permeability problem on [0,1]^2:
//   -div(kappa grad u) = f,  u = 0 on the boundary,
// kappa(x) = sum_i kappa_i exp(-0.5 |x - x0_i|^2 / width^2),
// f = source_amplitude sin(pi x1) sin(pi x2). Parameters are theta_i with
// kappa_i = exp(theta_i).

struct EllipticRbfConfig {
  int mesh = 33;
  double rbf_width = 0.15;
  std::vector<Point2> rbf_centers = sensor_grid(3, 0.2, 0.8);
  std::vector<Point2> sensors = sensor_grid(9, 0.1, 0.9);
  double source_amplitude = 100.0;
};

class EllipticRbfModel final : public ForwardModel {
public:
  using Field = std::function<double(double, double)>;

  explicit EllipticRbfModel(EllipticRbfConfig config);

  int n_params() const override { return static_cast<int>(config_.rbf_centers.size()); }
  int n_outputs() const override { return static_cast<int>(config_.sensors.size()); }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& log_weights) const override;
  std::string id() const override;
  std::shared_ptr<const ForwardModel> refined(int factor) const override;

  const EllipticRbfConfig& config() const { return config_; }

  double permeability(const Eigen::VectorXd& kappa_weights, double x1, double x2) const;

  /// Solve with RBF weights kappa_i > 0 and return the sensor values.
  Eigen::VectorXd solve(const Eigen::VectorXd& kappa_weights) const;

  /// Solve with an arbitrary permeability field and optional source override.
  Eigen::VectorXd solve_field(const Field& kappa, const std::optional<Field>& source = {}) const;

private:
  EllipticRbfConfig config_;
};

// ---------------------------------------------------------------------------
// Analytic toys.

/// G(z) = A z + c.
std::shared_ptr<const ForwardModel> make_linear_model(Eigen::MatrixXd a, Eigen::VectorXd c);

/// Single-output polynomial given as monomial terms coefficient * prod z_i^e_i.
struct Monomial {
  std::vector<int> exponents;
  double coefficient = 0.0;
};
std::shared_ptr<const ForwardModel> make_polynomial_model(int n_z, std::vector<Monomial> terms);

/// G(z) = scale * exp(sum_i z_i), smooth and outside every polynomial span.
std::shared_ptr<const ForwardModel> make_exp_sum_model(int n_z, double scale = 1.0);

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Conjugate posterior of z ~ N(m0, C0), d = A z + c + N(0, sigma^2 I).
GaussianPosterior linear_gaussian_posterior(const Eigen::MatrixXd& a, const Eigen::VectorXd& c,
                                            const Eigen::VectorXd& data, double sigma,
                                            const Eigen::VectorXd& prior_mean,
                                            const Eigen::MatrixXd& prior_covariance);

// ---------------------------------------------------------------------------
// Synthetic data.

struct NoiseSpec {
  enum class Kind { Gaussian, RelativeMax };
  Kind kind = Kind::Gaussian;
  double level = 0.0; // sigma for Gaussian, delta for RelativeMax

  static NoiseSpec gaussian(double sigma) { return {Kind::Gaussian, sigma}; }
  static NoiseSpec relative_max(double delta) { return {Kind::RelativeMax, delta}; }
};

struct SyntheticData {
  Eigen::VectorXd data;
  Eigen::VectorXd clean;          // fine-mesh model output
  double sigma_effective = 0.0;   // sigma, or max_j |u_j| * delta
};

/// d = G_fine(z_true) + e. Gaussian: e ~ N(0, sigma^2) i.i.d. Relative-max:
/// e_j = max_j |G_j| * delta * xi_j. Deterministic given the seed.
SyntheticData generate_synthetic_data(const ForwardModel& model, const Eigen::VectorXd& true_params,
                                      const NoiseSpec& noise, int fine_factor, std::uint64_t seed);

} // namespace ampc
