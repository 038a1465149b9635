#pragma once

#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ampc/bayes.hpp"
#include "ampc/mcmc.hpp"
#include "ampc/surrogate.hpp"

namespace ampc {

/// Tensor grid of at most three axes carrying an unnormalized log density.
/// Values are stored with the last axis varying fastest.
class GridPosterior {
public:
  GridPosterior(std::vector<Eigen::VectorXd> axes, Eigen::VectorXd log_density);

  /// Fill by evaluating `log_density` at every grid node. -inf is allowed.
  static GridPosterior evaluate(std::vector<Eigen::VectorXd> axes,
                                const std::function<double(const Eigen::VectorXd&)>& log_density);

  /// Histogram of samples (rows) with one bin per grid node; node k of an
  /// axis is the centre of bin k, so `axes` must be uniformly spaced.
  static GridPosterior from_samples(std::vector<Eigen::VectorXd> axes, const Eigen::MatrixXd& samples);

  int dimension() const { return static_cast<int>(axes_.size()); }
  const std::vector<Eigen::VectorXd>& axes() const { return axes_; }
  Eigen::Index size() const { return log_density_.size(); }
  const Eigen::VectorXd& log_density() const { return log_density_; }
  /// Tensor trapezoid weights.
  const Eigen::VectorXd& weights() const { return weights_; }
  double log_normalizer() const { return log_normalizer_; }
  Eigen::VectorXd node(Eigen::Index flat) const;
  /// Normalized density at every node.
  Eigen::VectorXd density() const;
  Eigen::VectorXd mean() const;
  bool same_grid(const GridPosterior& other) const;

private:
  std::vector<Eigen::VectorXd> axes_;
  Eigen::VectorXd log_density_;
  Eigen::VectorXd weights_;
  double log_normalizer_ = 0.0;
};

/// Uniformly spaced axis of `count` nodes on [lo, hi].
Eigen::VectorXd linspace(double lo, double hi, int count);

/// D_KL(approx || exact) by trapezoid quadrature.
double kl_divergence(const GridPosterior& approx, const GridPosterior& exact);
double hellinger_distance(const GridPosterior& approx, const GridPosterior& exact);

struct FeasibleSetEstimate {
  double fraction = 0.0;       // estimated posterior mass where err > epsilon
  double standard_error = 0.0;
  std::size_t exceed = 0;
  std::size_t samples = 0;
};

/// Fraction of posterior samples (rows; parameter columns first) at which
/// |u^H - u^L|_inf > epsilon. One diagnostic high-fidelity evaluation per
/// distinct sample.
FeasibleSetEstimate feasible_set_measure(const InverseProblem& problem, const PcSurrogate& surrogate,
                                         double epsilon, const Eigen::MatrixXd& samples);

/// Initial positive sequence estimator. A constant series reports 1.
double effective_sample_size(std::span<const double> series);

struct Histogram1D {
  Eigen::VectorXd edges;  // bins + 1
  Eigen::VectorXd counts;
};

struct Histogram2D {
  int first = 0;
  int second = 0;
  Eigen::VectorXd edges_first;
  Eigen::VectorXd edges_second;
  Eigen::MatrixXd counts;
};

/// Samples outside [lo, hi] are dropped; the last bin is closed.
Histogram1D histogram_1d(std::span<const double> values, double lo, double hi, int bins);

/// 1/2 sum |p_i - q_i| of two samples binned on a shared range.
double total_variation_1d(std::span<const double> a, std::span<const double> b, int bins);

struct ChainSummary {
  std::size_t burn_in = 0;
  std::size_t used = 0;
  double acceptance_rate = 0.0;
  Eigen::VectorXd means;
  Eigen::VectorXd standard_deviations;
  Eigen::VectorXd lower;  // 2.5% quantile
  Eigen::VectorXd upper;  // 97.5% quantile
  Eigen::VectorXd ess;
  std::vector<Histogram1D> marginals;
  std::vector<Histogram2D> pairs;
};

ChainSummary chain_summary(const Chain& chain, double burn_in_fraction, int bins = 50);

double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& reference);

nlohmann::json to_json(const ChainSummary& summary, const std::vector<std::string>& names);
nlohmann::json to_json(const FeasibleSetEstimate& estimate);
/// Long format: coordinate,bin,lower,upper,count.
void write_histograms_csv(const ChainSummary& summary, const std::vector<std::string>& names,
                          std::ostream& out);

} // namespace ampc
