#include "ampc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "ampc/error.hpp"

namespace ampc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& axis) {
  const Eigen::Index n = axis.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double h = axis[i + 1] - axis[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

double quantile(std::vector<double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (hi > lo) return {lo, hi};
  return {lo - 0.5, hi + 0.5};
}

} // namespace

Eigen::VectorXd linspace(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) throw InputError("grid axis needs at least 2 nodes and hi > lo");
  return Eigen::VectorXd::LinSpaced(count, lo, hi);
}

GridPosterior::GridPosterior(std::vector<Eigen::VectorXd> axes, Eigen::VectorXd log_density)
    : axes_(std::move(axes)), log_density_(std::move(log_density)) {
  if (axes_.empty() || axes_.size() > 3) {
    throw InputError("grid quadrature supports 1 to 3 dimensions, got " + std::to_string(axes_.size()));
  }
  Eigen::Index total = 1;
  for (const auto& a : axes_) {
    if (a.size() < 2) throw InputError("grid axis needs at least 2 nodes");
    for (Eigen::Index i = 0; i + 1 < a.size(); ++i) {
      if (!(a[i + 1] > a[i])) throw InputError("grid axis must be strictly increasing");
    }
    total *= a.size();
  }
  if (log_density_.size() != total) throw InputError("log density size does not match the grid");

  weights_ = Eigen::VectorXd::Ones(total);
  Eigen::Index stride = total;
  for (const auto& a : axes_) {
    stride /= a.size();
    const Eigen::VectorXd w = trapezoid_weights(a);
    for (Eigen::Index k = 0; k < total; ++k) weights_[k] *= w[(k / stride) % a.size()];
  }

  double peak = kNegInf;
  for (Eigen::Index k = 0; k < total; ++k) {
    if (std::isnan(log_density_[k]) || log_density_[k] == std::numeric_limits<double>::infinity()) {
      throw NumericalError("log density is NaN or +inf at grid node " + std::to_string(k));
    }
    peak = std::max(peak, log_density_[k]);
  }
  if (peak == kNegInf) throw NumericalError("density vanishes on the whole grid");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < total; ++k) sum += weights_[k] * std::exp(log_density_[k] - peak);
  if (!(sum > 0.0)) throw NumericalError("grid normalizer is zero");
  log_normalizer_ = peak + std::log(sum);
}

GridPosterior GridPosterior::evaluate(std::vector<Eigen::VectorXd> axes,
                                      const std::function<double(const Eigen::VectorXd&)>& log_density) {
  Eigen::Index total = 1;
  for (const auto& a : axes) total *= a.size();
  GridPosterior shape(axes, Eigen::VectorXd::Zero(total));
  Eigen::VectorXd values(total);
  for (Eigen::Index k = 0; k < total; ++k) values[k] = log_density(shape.node(k));
  return GridPosterior(std::move(axes), std::move(values));
}

GridPosterior GridPosterior::from_samples(std::vector<Eigen::VectorXd> axes, const Eigen::MatrixXd& samples) {
  if (samples.cols() != static_cast<Eigen::Index>(axes.size())) {
    throw InputError("sample dimension does not match the grid");
  }
  Eigen::Index total = 1;
  for (const auto& a : axes) total *= a.size();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(total);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    Eigen::Index flat = 0;
    bool inside = true;
    for (std::size_t d = 0; d < axes.size(); ++d) {
      const Eigen::VectorXd& a = axes[d];
      const double h = a[1] - a[0];
      const double pos = (samples(i, static_cast<Eigen::Index>(d)) - (a[0] - 0.5 * h)) / h;
      if (!(pos >= 0.0) || pos >= static_cast<double>(a.size())) {
        inside = false;
        break;
      }
      flat = flat * a.size() + static_cast<Eigen::Index>(pos);
    }
    if (inside) counts[flat] += 1.0;
  }
  Eigen::VectorXd log_counts(total);
  for (Eigen::Index k = 0; k < total; ++k) log_counts[k] = counts[k] > 0.0 ? std::log(counts[k]) : kNegInf;
  return GridPosterior(std::move(axes), std::move(log_counts));
}

Eigen::VectorXd GridPosterior::node(Eigen::Index flat) const {
  Eigen::VectorXd z(dimension());
  for (int d = dimension() - 1; d >= 0; --d) {
    const auto& a = axes_[static_cast<std::size_t>(d)];
    z[d] = a[flat % a.size()];
    flat /= a.size();
  }
  return z;
}

Eigen::VectorXd GridPosterior::density() const {
  return (log_density_.array() - log_normalizer_).exp().matrix();
}

Eigen::VectorXd GridPosterior::mean() const {
  const Eigen::VectorXd p = density();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dimension());
  for (Eigen::Index k = 0; k < size(); ++k) m += weights_[k] * p[k] * node(k);
  return m;
}

bool GridPosterior::same_grid(const GridPosterior& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (axes_[d].size() != other.axes_[d].size() || axes_[d] != other.axes_[d]) return false;
  }
  return true;
}

double kl_divergence(const GridPosterior& approx, const GridPosterior& exact) {
  if (!approx.same_grid(exact)) throw InputError("KL divergence needs identical grids");
  const auto& la = approx.log_density();
  const auto& le = exact.log_density();
  double kl = 0.0;
  for (Eigen::Index k = 0; k < approx.size(); ++k) {
    if (la[k] == kNegInf) continue;
    if (le[k] == kNegInf) {
      throw SupportError("approximate posterior is not absolutely continuous with respect to the exact "
                         "one: positive mass at " + format_point(approx.node(k)));
    }
    const double log_p = la[k] - approx.log_normalizer();
    const double log_q = le[k] - exact.log_normalizer();
    kl += approx.weights()[k] * std::exp(log_p) * (log_p - log_q);
  }
  return kl;
}

double hellinger_distance(const GridPosterior& approx, const GridPosterior& exact) {
  if (!approx.same_grid(exact)) throw InputError("Hellinger distance needs identical grids");
  const Eigen::VectorXd p = approx.density();
  const Eigen::VectorXd q = exact.density();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double d = std::sqrt(p[k]) - std::sqrt(q[k]);
    sum += approx.weights()[k] * d * d;
  }
  return std::clamp(std::sqrt(0.5 * sum), 0.0, 1.0);
}

FeasibleSetEstimate feasible_set_measure(const InverseProblem& problem, const PcSurrogate& surrogate,
                                         double epsilon, const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) throw InputError("feasible-set estimate needs at least one sample");
  if (samples.cols() < problem.parameter_dimension()) {
    throw InputError("samples have fewer columns than model parameters");
  }
  FeasibleSetEstimate est;
  est.samples = static_cast<std::size_t>(samples.rows());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Eigen::VectorXd z = samples.row(i).head(problem.parameter_dimension()).transpose();
    const Eigen::VectorXd high = problem.model().evaluate(z, EvalCategory::Diagnostic);
    if ((high - surrogate.evaluate(z)).cwiseAbs().maxCoeff() > epsilon) ++est.exceed;
  }
  const double n = static_cast<double>(est.samples);
  est.fraction = static_cast<double>(est.exceed) / n;
  est.standard_error = std::sqrt(est.fraction * (1.0 - est.fraction) / n);
  return est;
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) throw InputError("effective sample size of an empty series");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(series.begin(), series.end());
  for (double& v : c) v -= mean;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return 1.0;

  // tau = -1 + 2 sum_k (rho_{2k} + rho_{2k+1}), truncated at the first
  // non-positive pair and forced to be monotone.
  double tau = -1.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return static_cast<double>(n);
  return static_cast<double>(n) / tau;
}

Histogram1D histogram_1d(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1) throw InputError("histogram needs at least one bin");
  if (!(hi > lo)) throw InputError("histogram range must satisfy hi > lo");
  Histogram1D h;
  h.edges = Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
  h.counts = Eigen::VectorXd::Zero(bins);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (!(v >= lo && v <= hi)) continue;
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    h.counts[b] += 1.0;
  }
  return h;
}

double total_variation_1d(std::span<const double> a, std::span<const double> b, int bins) {
  if (a.empty() || b.empty()) throw InputError("total variation needs non-empty samples");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const auto [lo, hi] = padded_range(std::min(*amin, *bmin), std::max(*amax, *bmax));
  const Histogram1D ha = histogram_1d(a, lo, hi, bins);
  const Histogram1D hb = histogram_1d(b, lo, hi, bins);
  return 0.5 * (ha.counts / static_cast<double>(a.size()) - hb.counts / static_cast<double>(b.size()))
                   .cwiseAbs()
                   .sum();
}

ChainSummary chain_summary(const Chain& chain, double burn_in_fraction, int bins) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw InputError("burn-in fraction must lie in [0, 1)");
  }
  if (chain.size() == 0) throw InputError("chain summary of an empty chain");
  ChainSummary s;
  s.burn_in = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(chain.size())));
  const Eigen::MatrixXd m = chain.matrix(s.burn_in);
  s.used = static_cast<std::size_t>(m.rows());
  s.acceptance_rate = chain.acceptance_rate();
  const Eigen::Index d = m.cols();
  s.means = m.colwise().mean().transpose();
  s.standard_deviations.resize(d);
  s.lower.resize(d);
  s.upper.resize(d);
  s.ess.resize(d);
  std::vector<std::pair<double, double>> ranges;
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col = column(m, j);
    const double n = static_cast<double>(col.size());
    s.standard_deviations[j] =
        col.size() > 1 ? std::sqrt((m.col(j).array() - s.means[j]).square().sum() / (n - 1.0)) : 0.0;
    s.ess[j] = effective_sample_size(col);
    s.marginals.push_back({});
    std::sort(col.begin(), col.end());
    s.lower[j] = quantile(col, 0.025);
    s.upper[j] = quantile(col, 0.975);
    ranges.push_back(padded_range(col.front(), col.back()));
    s.marginals.back() = histogram_1d(col, ranges.back().first, ranges.back().second, bins);
  }
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = a + 1; b < d; ++b) {
      Histogram2D h;
      h.first = static_cast<int>(a);
      h.second = static_cast<int>(b);
      h.edges_first = s.marginals[static_cast<std::size_t>(a)].edges;
      h.edges_second = s.marginals[static_cast<std::size_t>(b)].edges;
      h.counts = Eigen::MatrixXd::Zero(bins, bins);
      const auto [alo, ahi] = ranges[static_cast<std::size_t>(a)];
      const auto [blo, bhi] = ranges[static_cast<std::size_t>(b)];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const int ia = std::min(bins - 1, static_cast<int>((m(i, a) - alo) / (ahi - alo) * bins));
        const int ib = std::min(bins - 1, static_cast<int>((m(i, b) - blo) / (bhi - blo) * bins));
        h.counts(ia, ib) += 1.0;
      }
      s.pairs.push_back(std::move(h));
    }
  }
  return s;
}

double relative_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& reference) {
  if (a.size() != reference.size()) throw InputError("relative L2 needs equal-length vectors");
  const double denom = reference.norm();
  if (!(denom > 0.0)) throw NumericalError("relative L2 against a zero reference");
  return (a - reference).norm() / denom;
}

nlohmann::json to_json(const ChainSummary& s, const std::vector<std::string>& names) {
  nlohmann::json coords = nlohmann::json::array();
  for (Eigen::Index j = 0; j < s.means.size(); ++j) {
    coords.push_back({{"name", names.at(static_cast<std::size_t>(j))},
                      {"mean", s.means[j]},
                      {"sd", s.standard_deviations[j]},
                      {"ci95", {s.lower[j], s.upper[j]}},
                      {"ess", s.ess[j]}});
  }
  return {{"burn_in", s.burn_in}, {"used", s.used}, {"acceptance_rate", s.acceptance_rate},
          {"coordinates", coords}};
}

nlohmann::json to_json(const FeasibleSetEstimate& e) {
  return {{"fraction", e.fraction}, {"standard_error", e.standard_error}, {"exceed", e.exceed},
          {"samples", e.samples}};
}

void write_histograms_csv(const ChainSummary& s, const std::vector<std::string>& names, std::ostream& out) {
  out << "coordinate,bin,lower,upper,count\n";
  char buf[128];
  for (std::size_t j = 0; j < s.marginals.size(); ++j) {
    const auto& h = s.marginals[j];
    for (Eigen::Index b = 0; b < h.counts.size(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", h.edges[b], h.edges[b + 1], h.counts[b]);
      out << names.at(j) << ',' << b << ',' << buf << '\n';
    }
  }
}

} // namespace ampc
