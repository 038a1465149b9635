#include "ampc/prior.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

#include "ampc/error.hpp"

namespace ampc {

Eigen::VectorXd PriorMap::to_reference(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != maps_.size()) {
    throw InputError("point dimension " + std::to_string(z.size()) +
                     " does not match prior map dimension " + std::to_string(maps_.size()));
  }
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = maps_[static_cast<std::size_t>(i)].to_reference(z[i]);
  }
  return out;
}

Eigen::VectorXd PriorMap::from_reference(const Eigen::VectorXd& zhat) const {
  if (static_cast<std::size_t>(zhat.size()) != maps_.size()) {
    throw InputError("reference point dimension does not match prior map dimension");
  }
  Eigen::VectorXd out(zhat.size());
  for (Eigen::Index i = 0; i < zhat.size(); ++i) {
    out[i] = maps_[static_cast<std::size_t>(i)].from_reference(zhat[i]);
  }
  return out;
}

Eigen::MatrixXd PriorMap::rows_from_reference(const Eigen::MatrixXd& zhat) const {
  Eigen::MatrixXd out(zhat.rows(), zhat.cols());
  for (Eigen::Index q = 0; q < zhat.rows(); ++q) {
    out.row(q) = from_reference(zhat.row(q).transpose()).transpose();
  }
  return out;
}

PriorMap PriorMap::identity(std::size_t dimension) {
  return PriorMap(std::vector<AffineMap>(dimension));
}

PriorMarginal PriorMarginal::uniform(double lower, double upper) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw InputError("uniform prior needs finite bounds with lower < upper");
  }
  return {Kind::Uniform, lower, upper};
}

PriorMarginal PriorMarginal::gaussian(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd)) {
    throw InputError("Gaussian prior needs a finite mean and positive standard deviation");
  }
  return {Kind::Gaussian, mean, sd};
}

PriorSpec::PriorSpec(std::vector<PriorMarginal> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw InputError("prior must have at least one coordinate");
  (void)family();
}

PriorSpec PriorSpec::uniform_box(int dimension, double lower, double upper) {
  return PriorSpec(std::vector<PriorMarginal>(static_cast<std::size_t>(dimension),
                                              PriorMarginal::uniform(lower, upper)));
}

PriorSpec PriorSpec::standard_gaussian(int dimension) {
  return PriorSpec(std::vector<PriorMarginal>(static_cast<std::size_t>(dimension),
                                              PriorMarginal::gaussian(0.0, 1.0)));
}

BasisFamily PriorSpec::family() const {
  const auto kind = marginals_.front().kind;
  for (const auto& m : marginals_) {
    if (m.kind != kind) {
      throw InputError("mixed uniform/Gaussian priors are not supported in one basis");
    }
  }
  return kind == PriorMarginal::Kind::Uniform ? BasisFamily::LegendreUniform
                                              : BasisFamily::HermiteGaussian;
}

PriorMap PriorSpec::reference_map() const {
  std::vector<AffineMap> maps;
  maps.reserve(marginals_.size());
  for (const auto& m : marginals_) {
    if (m.kind == PriorMarginal::Kind::Uniform) {
      maps.push_back({0.5 * (m.a + m.b), 0.5 * (m.b - m.a)});
    } else {
      maps.push_back({m.a, m.b});
    }
  }
  return PriorMap(std::move(maps));
}

bool PriorSpec::in_support(const Eigen::VectorXd& z) const {
  if (z.size() < dimension()) return false;
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    const double v = z[static_cast<Eigen::Index>(i)];
    if (!std::isfinite(v)) return false;
    const auto& m = marginals_[i];
    if (m.kind == PriorMarginal::Kind::Uniform && (v < m.a || v > m.b)) return false;
  }
  return true;
}

double PriorSpec::log_density(const Eigen::VectorXd& z) const {
  if (!in_support(z)) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    const auto& m = marginals_[i];
    const double v = z[static_cast<Eigen::Index>(i)];
    if (m.kind == PriorMarginal::Kind::Uniform) {
      sum -= std::log(m.b - m.a);
    } else {
      const double r = (v - m.a) / m.b;
      sum += -0.5 * r * r - std::log(m.b) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
  }
  return sum;
}

Eigen::VectorXd PriorSpec::clamp(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out = z;
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    const auto& m = marginals_[i];
    if (m.kind == PriorMarginal::Kind::Uniform) {
      const auto k = static_cast<Eigen::Index>(i);
      out[k] = std::clamp(out[k], m.a, m.b);
    }
  }
  return out;
}

Eigen::VectorXd PriorSpec::sample(std::mt19937_64& rng) const {
  Eigen::VectorXd z(dimension());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    const auto& m = marginals_[i];
    const auto k = static_cast<Eigen::Index>(i);
    z[k] = m.kind == PriorMarginal::Kind::Uniform ? m.a + (m.b - m.a) * unif(rng)
                                                  : m.a + m.b * normal(rng);
  }
  return z;
}

nlohmann::json to_json(const PriorMap& map) {
  auto j = nlohmann::json::array();
  for (const auto& m : map.maps()) j.push_back({{"shift", m.shift}, {"scale", m.scale}});
  return j;
}

PriorMap prior_map_from_json(const nlohmann::json& j) {
  std::vector<AffineMap> maps;
  for (const auto& e : j) maps.push_back({e.at("shift").get<double>(), e.at("scale").get<double>()});
  return PriorMap(std::move(maps));
}

nlohmann::json to_json(const PriorSpec& prior) {
  auto j = nlohmann::json::array();
  for (const auto& m : prior.marginals()) {
    if (m.kind == PriorMarginal::Kind::Uniform) {
      j.push_back({{"kind", "uniform"}, {"lower", m.a}, {"upper", m.b}});
    } else {
      j.push_back({{"kind", "gaussian"}, {"mean", m.a}, {"sd", m.b}});
    }
  }
  return j;
}

PriorSpec prior_spec_from_json(const nlohmann::json& j) {
  // Either a list of marginals, or {kind, ..., dim} repeated dim times.
  auto one = [](const nlohmann::json& e) {
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "uniform") {
      return PriorMarginal::uniform(e.value("lower", 0.0), e.value("upper", 1.0));
    }
    if (kind == "gaussian") {
      return PriorMarginal::gaussian(e.value("mean", 0.0), e.value("sd", 1.0));
    }
    throw InputError("unknown prior kind '" + kind + "'");
  };
  std::vector<PriorMarginal> marginals;
  if (j.is_array()) {
    for (const auto& e : j) marginals.push_back(one(e));
  } else if (j.is_object()) {
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw InputError("prior dim must be positive");
    marginals.assign(static_cast<std::size_t>(dim), one(j));
  } else {
    throw InputError("prior must be an array of marginals or an object with 'dim'");
  }
  return PriorSpec(std::move(marginals));
}

} // namespace ampc
