#include "ampc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ampc/error.hpp"

namespace ampc {

namespace {

constexpr std::uint64_t kMaxIndexEntries = std::uint64_t{1} << 31;

void check_finite(std::span<const double> z) {
  for (double v : z) {
    if (!std::isfinite(v)) {
      throw InputError("basis evaluation at a non-finite point");
    }
  }
}

// Appends every composition of `degree` into the trailing positions of
// `current`, starting at `pos`, with the leading entries largest first.
void append_compositions(int degree, std::size_t pos, std::vector<int>& current,
                         std::vector<MultiIndex>& out) {
  if (pos + 1 == current.size()) {
    current[pos] = degree;
    out.emplace_back(current);
    return;
  }
  for (int first = degree; first >= 0; --first) {
    current[pos] = first;
    append_compositions(degree - first, pos + 1, current, out);
  }
  current[pos] = 0;
}

} // namespace

std::string_view to_string(BasisFamily family) {
  switch (family) {
  case BasisFamily::LegendreUniform:
    return "legendre";
  case BasisFamily::HermiteGaussian:
    return "hermite";
  }
  return "unknown";
}

BasisFamily basis_family_from_string(std::string_view name) {
  if (name == "legendre") return BasisFamily::LegendreUniform;
  if (name == "hermite") return BasisFamily::HermiteGaussian;
  throw InputError("unknown basis family '" + std::string(name) + "'");
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_) {
    if (e < 0) throw InputError("multi-index entries must be non-negative");
  }
}

int MultiIndex::total_degree() const {
  int sum = 0;
  for (int e : entries_) sum += e;
  return sum;
}

MultiIndexSet::MultiIndexSet(int dimension, int order, std::vector<MultiIndex> indices)
    : dimension_(dimension), order_(order), indices_(std::move(indices)) {
  for (const auto& m : indices_) {
    if (static_cast<int>(m.dimension()) != dimension_) {
      throw InputError("multi-index dimension does not match the set dimension");
    }
  }
}

std::optional<std::size_t> MultiIndexSet::position(const MultiIndex& index) const {
  auto it = std::find(indices_.begin(), indices_.end(), index);
  if (it == indices_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - indices_.begin());
}

bool MultiIndexSet::is_prefix_of(const MultiIndexSet& other) const {
  if (dimension_ != other.dimension_ || size() > other.size()) return false;
  return std::equal(indices_.begin(), indices_.end(), other.indices_.begin());
}

std::uint64_t total_degree_cardinality(int n_z, int order) {
  if (n_z < 1) throw InputError("index set dimension must be at least 1");
  if (order < 0) throw InputError("index set order must be non-negative");
  // C(n_z + N, k) built up for k = 1..min(n_z, N); each partial value is itself
  // a binomial coefficient, so the division is exact.
  const std::uint64_t n = static_cast<std::uint64_t>(n_z) + static_cast<std::uint64_t>(order);
  const std::uint64_t k = static_cast<std::uint64_t>(std::min(n_z, order));
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      throw CapacityError("cardinality C(" + std::to_string(n) + ", " + std::to_string(n_z) +
                          ") overflows a 64-bit integer");
    }
  }
  return static_cast<std::uint64_t>(result);
}

MultiIndexSet total_degree_index_set(int n_z, int order) {
  const std::uint64_t card = total_degree_cardinality(n_z, order);
  if (card > kMaxIndexEntries / static_cast<std::uint64_t>(n_z)) {
    throw CapacityError("total-degree set with " + std::to_string(card) +
                        " elements exceeds the supported capacity");
  }
  std::vector<MultiIndex> indices;
  indices.reserve(static_cast<std::size_t>(card));
  std::vector<int> current(static_cast<std::size_t>(n_z), 0);
  for (int degree = 0; degree <= order; ++degree) {
    append_compositions(degree, 0, current, indices);
  }
  return MultiIndexSet(n_z, order, std::move(indices));
}

void evaluate_univariate_all(BasisFamily family, int max_degree, double x,
                             std::span<double> values) {
  if (max_degree < 0) throw InputError("negative polynomial degree");
  if (values.size() < static_cast<std::size_t>(max_degree) + 1) {
    throw InputError("output buffer too small for univariate evaluation");
  }
  values[0] = 1.0;
  if (max_degree == 0) return;
  switch (family) {
  case BasisFamily::LegendreUniform: {
    // x p_n = a_{n+1} p_{n+1} + a_n p_{n-1},  a_n = n / sqrt(4n^2 - 1)
    values[1] = std::sqrt(3.0) * x;
    for (int n = 1; n < max_degree; ++n) {
      const double dn = n;
      const double a_n = dn / std::sqrt(4.0 * dn * dn - 1.0);
      const double a_next = (dn + 1.0) / std::sqrt(4.0 * (dn + 1.0) * (dn + 1.0) - 1.0);
      values[n + 1] = (x * values[n] - a_n * values[n - 1]) / a_next;
    }
    break;
  }
  case BasisFamily::HermiteGaussian: {
    // x h_n = sqrt(n+1) h_{n+1} + sqrt(n) h_{n-1}
    values[1] = x;
    for (int n = 1; n < max_degree; ++n) {
      values[n + 1] = (x * values[n] - std::sqrt(static_cast<double>(n)) * values[n - 1]) /
                      std::sqrt(static_cast<double>(n + 1));
    }
    break;
  }
  }
}

double evaluate_univariate(BasisFamily family, int degree, double x) {
  if (!std::isfinite(x)) throw InputError("basis evaluation at a non-finite point");
  std::vector<double> values(static_cast<std::size_t>(std::max(degree, 0)) + 1);
  evaluate_univariate_all(family, degree, x, values);
  return values[static_cast<std::size_t>(degree)];
}

double evaluate_basis(BasisFamily family, const MultiIndex& index, std::span<const double> z) {
  if (index.dimension() != z.size()) {
    throw InputError("multi-index dimension " + std::to_string(index.dimension()) +
                     " does not match point dimension " + std::to_string(z.size()));
  }
  check_finite(z);
  double product = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (index[i] == 0) continue;
    product *= evaluate_univariate(family, index[i], z[i]);
  }
  return product;
}

Eigen::VectorXd evaluate_basis_row(BasisFamily family, const MultiIndexSet& set,
                                   std::span<const double> z) {
  const auto n_z = static_cast<std::size_t>(set.dimension());
  if (z.size() != n_z) {
    throw InputError("point dimension " + std::to_string(z.size()) +
                     " does not match index set dimension " + std::to_string(n_z));
  }
  check_finite(z);
  const auto stride = static_cast<std::size_t>(set.order()) + 1;
  std::vector<double> table(n_z * stride);
  for (std::size_t i = 0; i < n_z; ++i) {
    evaluate_univariate_all(family, set.order(), z[i],
                            std::span<double>(table.data() + i * stride, stride));
  }
  Eigen::VectorXd row(static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto& m = set[k];
    double product = 1.0;
    for (std::size_t i = 0; i < n_z; ++i) {
      if (m[i] != 0) product *= table[i * stride + static_cast<std::size_t>(m[i])];
    }
    row[static_cast<Eigen::Index>(k)] = product;
  }
  return row;
}

Eigen::MatrixXd vandermonde(BasisFamily family, const MultiIndexSet& set,
                            const Eigen::MatrixXd& points) {
  if (points.cols() != set.dimension()) {
    throw InputError("design point dimension does not match index set dimension");
  }
  Eigen::MatrixXd phi(points.rows(), static_cast<Eigen::Index>(set.size()));
  Eigen::VectorXd z(points.cols());
  for (Eigen::Index q = 0; q < points.rows(); ++q) {
    z = points.row(q).transpose();
    phi.row(q) = evaluate_basis_row(family, set, as_span(z)).transpose();
  }
  return phi;
}

} // namespace ampc
