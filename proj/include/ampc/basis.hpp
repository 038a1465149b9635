#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ampc {

/// Univariate orthonormal families. Legendre is orthonormal under the uniform
/// density 1/2 on [-1,1]; Hermite (probabilists') under the standard normal.
enum class BasisFamily { LegendreUniform, HermiteGaussian };

std::string_view to_string(BasisFamily family);
BasisFamily basis_family_from_string(std::string_view name);

/// Multi-index m = (m_1, ..., m_nz) of non-negative degrees.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  std::size_t dimension() const { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  int total_degree() const;
  const std::vector<int>& entries() const { return entries_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
  std::vector<int> entries_;
};

/// Identifier of the ordering rule, stored with serialized surrogates.
inline constexpr std::string_view kGradedLexOrdering = "graded-lex-desc-v1";

/// Total-degree set {m : |m|_1 <= N}. Ordered by total degree, then
/// lexicographically descending inside each degree, so that the set for a
/// smaller order is always a prefix of the set for a larger one.
class MultiIndexSet {
public:
  MultiIndexSet(int dimension, int order, std::vector<MultiIndex> indices);

  int dimension() const { return dimension_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  std::optional<std::size_t> position(const MultiIndex& index) const;

  /// True when every element of `this` occurs in `other` at the same position.
  bool is_prefix_of(const MultiIndexSet& other) const;

private:
  int dimension_;
  int order_;
  std::vector<MultiIndex> indices_;
};

/// C(n_z + N, n_z); throws CapacityError on overflow.
std::uint64_t total_degree_cardinality(int n_z, int order);

MultiIndexSet total_degree_index_set(int n_z, int order);

/// phi_n(x) for the orthonormal family, by three-term recurrence.
double evaluate_univariate(BasisFamily family, int degree, double x);

/// Fills values[0..max_degree] with phi_0(x) .. phi_max_degree(x).
void evaluate_univariate_all(BasisFamily family, int max_degree, double x,
                             std::span<double> values);

/// Phi_m(z) = prod_i phi_{m_i}(z_i).
double evaluate_basis(BasisFamily family, const MultiIndex& index,
                      std::span<const double> z);

/// One Vandermonde row (Phi_1(z), ..., Phi_M(z)) in index-set order.
Eigen::VectorXd evaluate_basis_row(BasisFamily family, const MultiIndexSet& set,
                                   std::span<const double> z);

/// Q x M Vandermonde matrix for points stored row-wise (Q x n_z).
Eigen::MatrixXd vandermonde(BasisFamily family, const MultiIndexSet& set,
                            const Eigen::MatrixXd& points);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace ampc
