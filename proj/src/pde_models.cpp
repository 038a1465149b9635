#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ampc/error.hpp"
#include "ampc/models.hpp"

namespace ampc {

namespace {

struct BilinearStencil {
  std::array<Eigen::Index, 4> nodes;
  std::array<double, 4> weights;
};

BilinearStencil bilinear(int mesh, double x, double y) {
  const double h = 1.0 / (mesh - 1);
  auto locate = [&](double v) {
    const double s = std::clamp(v, 0.0, 1.0) / h;
    const int i = std::min(static_cast<int>(std::floor(s)), mesh - 2);
    return std::pair{i, s - i};
  };
  const auto [i, tx] = locate(x);
  const auto [j, ty] = locate(y);
  auto node = [&](int a, int b) { return static_cast<Eigen::Index>(b) * mesh + a; };
  return {{node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)},
          {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty}};
}

double interpolate(const Eigen::VectorXd& field, const BilinearStencil& s) {
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += s.weights[static_cast<std::size_t>(k)] * field[s.nodes[static_cast<std::size_t>(k)]];
  return v;
}

// Trapezoidal row scaling that symmetrizes the mirrored-ghost Neumann operator.
double boundary_scale(int i, int j, int mesh) {
  double s = 1.0;
  if (i == 0 || i == mesh - 1) s *= 0.5;
  if (j == 0 || j == mesh - 1) s *= 0.5;
  return s;
}

} // namespace

std::vector<Point2> sensor_grid(int n, double lo, double hi) {
  if (n < 1) throw InputError("sensor grid needs at least one point per side");
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(n * n));
  const double step = n > 1 ? (hi - lo) / (n - 1) : 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) out.push_back({lo + i * step, lo + j * step});
  }
  return out;
}

FractionalSourceConfig FractionalSourceConfig::known_alpha() { return {}; }

FractionalSourceConfig FractionalSourceConfig::unknown_alpha() {
  FractionalSourceConfig c;
  c.sensors = sensor_grid(5, 0.0, 1.0);
  c.times = {0.25, 0.75, 1.0};
  c.infer_alpha = true;
  return c;
}

std::vector<double> l1_weights(double alpha, int count) {
  std::vector<double> b(static_cast<std::size_t>(std::max(count, 0)));
  const double p = 1.0 - alpha;
  for (int j = 0; j < count; ++j) {
    // b_0 = 1 for every alpha; pow(0, 0) would give 0 at alpha = 1.
    b[static_cast<std::size_t>(j)] = j == 0 ? 1.0 : std::pow(j + 1.0, p) - std::pow(static_cast<double>(j), p);
  }
  return b;
}

struct FractionalSourceModel::Operator {
  double alpha = 1.0;
  double memory_scale = 1.0; // 1 / (Gamma(2 - alpha) dt^alpha)
  Eigen::VectorXd row_scale;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

FractionalSourceModel::FractionalSourceModel(FractionalSourceConfig config)
    : config_(std::move(config)) {
  if (config_.mesh < 3) throw InputError("fractional model mesh needs at least 3 nodes per side");
  if (!(config_.dt > 0.0)) throw InputError("time step must be positive");
  if (config_.sensors.empty() || config_.times.empty()) {
    throw InputError("fractional model needs sensors and measurement times");
  }
  for (double t : config_.times) {
    if (!(t > 0.0)) throw InputError("measurement times must be positive");
  }
  if (!config_.infer_alpha) {
    if (!(config_.alpha > 0.0 && config_.alpha <= 1.0)) {
      throw InputError("fractional order alpha must lie in (0, 1]");
    }
    fixed_operator_ = factor_operator(config_.alpha);
  }
}

std::shared_ptr<const FractionalSourceModel::Operator>
FractionalSourceModel::factor_operator(double alpha) const {
  const int p = config_.mesh;
  const double h = 1.0 / (p - 1);
  const double inv_h2 = 1.0 / (h * h);
  auto op = std::make_shared<Operator>();
  op->alpha = alpha;
  op->memory_scale = 1.0 / (std::tgamma(2.0 - alpha) * std::pow(config_.dt, alpha));
  const Eigen::Index n = static_cast<Eigen::Index>(p) * p;
  op->row_scale.resize(n);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n));
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(j) * p + i;
      const double s = boundary_scale(i, j, p);
      op->row_scale[row] = s;
      double diag = op->memory_scale;
      auto couple = [&](int ii, int jj, double w) {
        triplets.emplace_back(row, static_cast<Eigen::Index>(jj) * p + ii, -s * w * inv_h2);
      };
      // Mirrored ghost nodes double the inward neighbour at the boundary.
      if (i == 0) couple(1, j, 2.0);
      else if (i == p - 1) couple(p - 2, j, 2.0);
      else { couple(i - 1, j, 1.0); couple(i + 1, j, 1.0); }
      if (j == 0) couple(i, 1, 2.0);
      else if (j == p - 1) couple(i, p - 2, 2.0);
      else { couple(i, j - 1, 1.0); couple(i, j + 1, 1.0); }
      diag += 4.0 * inv_h2;
      triplets.emplace_back(row, row, s * diag);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  op->solver.compute(a);
  if (op->solver.info() != Eigen::Success) {
    throw NumericalError("factorization of the fractional diffusion operator failed");
  }
  return op;
}

Eigen::VectorXd FractionalSourceModel::evaluate(const Eigen::VectorXd& params) const {
  if (params.size() != n_params()) {
    throw InputError("fractional model expects " + std::to_string(n_params()) + " parameters");
  }
  const double alpha = config_.infer_alpha ? params[2] : config_.alpha;
  return solve(params[0], params[1], alpha);
}

Eigen::VectorXd FractionalSourceModel::solve(double z1, double z2, double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("fractional order alpha must lie in (0, 1]");
  if (!std::isfinite(z1) || !std::isfinite(z2)) throw InputError("source location is not finite");

  std::shared_ptr<const Operator> op =
      (fixed_operator_ && fixed_operator_->alpha == alpha) ? fixed_operator_ : factor_operator(alpha);

  const int p = config_.mesh;
  const double h = 1.0 / (p - 1);
  const Eigen::Index n = static_cast<Eigen::Index>(p) * p;
  const double dt = config_.dt;
  const double t_max = *std::max_element(config_.times.begin(), config_.times.end());
  const int steps = static_cast<int>(std::ceil(t_max / dt - 1e-9));

  // Which time levels are needed for the sensor times (linear interpolation
  // between levels when a time is not on the grid).
  std::vector<int> needed(static_cast<std::size_t>(steps) + 1, -1);
  std::vector<std::pair<int, double>> time_levels;
  for (double t : config_.times) {
    const double s = t / dt;
    int lo = static_cast<int>(std::floor(s + 1e-9));
    double frac = s - lo;
    if (std::abs(frac) < 1e-9) frac = 0.0;
    lo = std::min(lo, steps);
    time_levels.emplace_back(lo, frac);
    needed[static_cast<std::size_t>(lo)] = 1;
    if (frac > 0.0 && lo + 1 <= steps) needed[static_cast<std::size_t>(lo) + 1] = 1;
  }

  Eigen::VectorXd shape(n);
  const double inv_w2 = 1.0 / (config_.source_width * config_.source_width);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double dx = z1 - i * h;
      const double dy = z2 - j * h;
      shape[static_cast<Eigen::Index>(j) * p + i] =
          config_.amplitude * std::exp(-0.5 * (dx * dx + dy * dy) * inv_w2);
    }
  }

  const std::vector<double> b = l1_weights(alpha, steps + 1);
  const double c = op->memory_scale;
  std::vector<Eigen::VectorXd> increments;
  increments.reserve(static_cast<std::size_t>(steps));
  std::vector<Eigen::VectorXd> stored(static_cast<std::size_t>(steps) + 1);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  stored[0] = u;
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd history(n);

  for (int step = 1; step <= steps; ++step) {
    history.setZero();
    // sum_{j=1}^{step-1} b_j (u^{step-j} - u^{step-j-1})
    for (int jj = 1; jj < step; ++jj) {
      history.noalias() += b[static_cast<std::size_t>(jj)] * increments[static_cast<std::size_t>(step - jj - 1)];
    }
    rhs = std::exp(-step * dt) * shape + c * (u - history);
    Eigen::VectorXd next = op->solver.solve(op->row_scale.cwiseProduct(rhs));
    increments.push_back(next - u);
    u = std::move(next);
    if (needed[static_cast<std::size_t>(step)] > 0) stored[static_cast<std::size_t>(step)] = u;
  }

  const auto n_sensors = config_.sensors.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_sensors * config_.times.size()));
  std::vector<BilinearStencil> stencils;
  stencils.reserve(n_sensors);
  for (const auto& s : config_.sensors) stencils.push_back(bilinear(p, s[0], s[1]));
  for (std::size_t t = 0; t < time_levels.size(); ++t) {
    const auto [lo, frac] = time_levels[t];
    for (std::size_t s = 0; s < n_sensors; ++s) {
      double v = interpolate(stored[static_cast<std::size_t>(lo)], stencils[s]);
      if (frac > 0.0 && lo + 1 <= steps) {
        v = (1.0 - frac) * v + frac * interpolate(stored[static_cast<std::size_t>(lo) + 1], stencils[s]);
      }
      out[static_cast<Eigen::Index>(t * n_sensors + s)] = v;
    }
  }
  return out;
}

std::string FractionalSourceModel::id() const {
  std::ostringstream os;
  os.precision(17);
  os << "fractional_source(mesh=" << config_.mesh << ",dt=" << config_.dt
     << ",alpha=" << (config_.infer_alpha ? std::string("param") : std::to_string(config_.alpha))
     << ",width=" << config_.source_width << ",amp=" << config_.amplitude
     << ",sensors=" << config_.sensors.size() << ",times=" << config_.times.size() << ")";
  return os.str();
}

std::shared_ptr<const ForwardModel> FractionalSourceModel::refined(int factor) const {
  if (factor < 1) throw InputError("mesh refinement factor must be at least 1");
  FractionalSourceConfig c = config_;
  c.mesh = (config_.mesh - 1) * factor + 1;
  return std::make_shared<FractionalSourceModel>(std::move(c));
}

// ---------------------------------------------------------------------------

EllipticRbfModel::EllipticRbfModel(EllipticRbfConfig config) : config_(std::move(config)) {
  if (config_.mesh < 3) throw InputError("elliptic model mesh needs at least 3 nodes per side");
  if (config_.rbf_centers.empty()) throw InputError("elliptic model needs RBF centers");
  if (!(config_.rbf_width > 0.0)) throw InputError("RBF width must be positive");
  if (config_.sensors.empty()) throw InputError("elliptic model needs sensors");
}

double EllipticRbfModel::permeability(const Eigen::VectorXd& kappa_weights, double x1,
                                      double x2) const {
  const double inv_w2 = 1.0 / (config_.rbf_width * config_.rbf_width);
  double k = 0.0;
  for (std::size_t i = 0; i < config_.rbf_centers.size(); ++i) {
    const double dx = x1 - config_.rbf_centers[i][0];
    const double dy = x2 - config_.rbf_centers[i][1];
    k += kappa_weights[static_cast<Eigen::Index>(i)] * std::exp(-0.5 * (dx * dx + dy * dy) * inv_w2);
  }
  return k;
}

Eigen::VectorXd EllipticRbfModel::evaluate(const Eigen::VectorXd& log_weights) const {
  if (log_weights.size() != n_params()) {
    throw InputError("elliptic model expects " + std::to_string(n_params()) + " parameters");
  }
  return solve(log_weights.array().exp().matrix());
}

Eigen::VectorXd EllipticRbfModel::solve(const Eigen::VectorXd& kappa_weights) const {
  if (kappa_weights.size() != n_params()) throw InputError("wrong number of RBF weights");
  for (Eigen::Index i = 0; i < kappa_weights.size(); ++i) {
    if (!(kappa_weights[i] > 0.0) || !std::isfinite(kappa_weights[i])) {
      throw InputError("RBF weights must be positive and finite");
    }
  }
  return solve_field([&](double x1, double x2) { return permeability(kappa_weights, x1, x2); });
}

Eigen::VectorXd EllipticRbfModel::solve_field(const Field& kappa,
                                              const std::optional<Field>& source) const {
  const int p = config_.mesh;
  const double h = 1.0 / (p - 1);
  const double inv_h2 = 1.0 / (h * h);
  const int m = p - 2;
  const Eigen::Index n = static_cast<Eigen::Index>(m) * m;

  Eigen::VectorXd k_nodes(static_cast<Eigen::Index>(p) * p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const double v = kappa(i * h, j * h);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InputError("permeability must be positive and finite (got " + std::to_string(v) +
                         " at node (" + std::to_string(i) + ", " + std::to_string(j) + "))");
      }
      k_nodes[static_cast<Eigen::Index>(j) * p + i] = v;
    }
  }
  auto kn = [&](int i, int j) { return k_nodes[static_cast<Eigen::Index>(j) * p + i]; };
  auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
  auto unknown = [&](int i, int j) { return static_cast<Eigen::Index>(j - 1) * m + (i - 1); };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n));
  Eigen::VectorXd rhs(n);
  const double amp = config_.source_amplitude;
  for (int j = 1; j <= m; ++j) {
    for (int i = 1; i <= m; ++i) {
      const Eigen::Index row = unknown(i, j);
      const double x1 = i * h;
      const double x2 = j * h;
      rhs[row] = source ? (*source)(x1, x2)
                        : amp * std::sin(std::numbers::pi * x1) * std::sin(std::numbers::pi * x2);
      double diag = 0.0;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& q : nb) {
        const double t = harmonic(kn(i, j), kn(q[0], q[1])) * inv_h2;
        diag += t;
        const bool interior = q[0] >= 1 && q[0] <= m && q[1] >= 1 && q[1] <= m;
        if (interior) triplets.emplace_back(row, unknown(q[0], q[1]), -t);
      }
      triplets.emplace_back(row, row, diag);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("factorization of the elliptic operator failed");
  }
  const Eigen::VectorXd interior = solver.solve(rhs);
  const double scale = std::max(rhs.norm(), 1e-300);
  const double residual = (a * interior - rhs).norm() / scale;
  if (solver.info() != Eigen::Success || !(residual < 1e-8)) {
    throw NumericalError("elliptic solve failed, relative residual " + std::to_string(residual));
  }

  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p) * p);
  for (int j = 1; j <= m; ++j) {
    for (int i = 1; i <= m; ++i) u[static_cast<Eigen::Index>(j) * p + i] = interior[unknown(i, j)];
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(config_.sensors.size()));
  for (std::size_t s = 0; s < config_.sensors.size(); ++s) {
    out[static_cast<Eigen::Index>(s)] =
        interpolate(u, bilinear(p, config_.sensors[s][0], config_.sensors[s][1]));
  }
  return out;
}

std::string EllipticRbfModel::id() const {
  std::ostringstream os;
  os.precision(17);
  os << "elliptic_rbf(mesh=" << config_.mesh << ",width=" << config_.rbf_width
     << ",centers=" << config_.rbf_centers.size() << ",sensors=" << config_.sensors.size()
     << ",f=" << config_.source_amplitude << ")";
  return os.str();
}

std::shared_ptr<const ForwardModel> EllipticRbfModel::refined(int factor) const {
  if (factor < 1) throw InputError("mesh refinement factor must be at least 1");
  EllipticRbfConfig c = config_;
  c.mesh = (config_.mesh - 1) * factor + 1;
  return std::make_shared<EllipticRbfModel>(std::move(c));
}

} // namespace ampc
