#pragma once

// Finitely supported multi-indices, the tensorized Chebyshev system and the
// weighted index sets used as polynomial chaos dictionaries.
//
// Parameter dimensions are numbered from 1, matching the usual notation
// y = (y_1, y_2, ...). In vectors of parameter values, y_j lives at [j - 1].

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wgcs {

/// Multi-index nu with finite support, stored as sorted (dimension, degree)
/// pairs with strictly positive degrees.
class MultiIndex {
 public:
  using Entry = std::pair<std::uint32_t, std::uint32_t>;

  MultiIndex() = default;
  /// Entries may come in any order; zero degrees are dropped.
  explicit MultiIndex(std::vector<Entry> entries);
  /// Dense form (nu_1, nu_2, ...).
  static MultiIndex from_dense(std::span<const std::uint32_t> degrees);
  /// nu = k * e_j
  static MultiIndex unit(std::uint32_t dimension, std::uint32_t degree = 1);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// ||nu||_0
  std::size_t support_size() const noexcept { return entries_.size(); }
  bool is_zero() const noexcept { return entries_.empty(); }
  std::uint32_t degree(std::uint32_t dimension) const;
  /// Largest dimension in the support, 0 for the zero index.
  std::uint32_t max_dimension() const noexcept {
    return entries_.empty() ? 0 : entries_.back().first;
  }
  /// Coordinatewise <=.
  bool is_below(const MultiIndex& other) const;

  /// Sorted `j:nu_j` pairs separated by spaces; "0" for the zero index.
  std::string to_string() const;
  static MultiIndex parse(const std::string& text);

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<Entry> entries_;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu);

/// Per-dimension weight sequence v_j used to build omega_nu.
class WeightRule {
 public:
  enum class Kind { constant, polynomial, explicit_values };

  /// v_j = beta for j <= dimensions and +inf beyond; dimensions == 0 means
  /// unbounded.
  static WeightRule constant(double beta, std::uint32_t dimensions = 0);
  /// v_j = c * j^alpha
  static WeightRule polynomial(double c, double alpha);
  /// v_j = values[j - 1], +inf beyond the list.
  static WeightRule explicit_values(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  /// v_j for j >= 1; +infinity where the rule excludes the dimension.
  double value(std::uint32_t j) const;
  /// Last dimension with finite v_j, or 0 when every dimension is finite.
  std::uint32_t finite_dimensions() const noexcept;

  double beta() const noexcept { return a_; }
  double c() const noexcept { return a_; }
  double alpha() const noexcept { return b_; }
  std::uint32_t dimensions() const noexcept { return dims_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::string describe() const;

 private:
  WeightRule(Kind kind, double a, double b, std::uint32_t dims, std::vector<double> values);

  Kind kind_;
  double a_;
  double b_;
  std::uint32_t dims_;
  std::vector<double> values_;
};

/// Normalized Chebyshev polynomial: T_0 = 1, T_j(t) = sqrt(2) cos(j arccos t).
double chebyshev_eval(std::uint32_t j, double t);

/// prod_{j in supp nu} T_{nu_j}(y_j); y[j - 1] holds y_j.
double tensor_chebyshev_eval(const MultiIndex& nu, std::span<const double> y);

/// omega_nu = 2^{||nu||_0 / 2} prod_j v_j^{nu_j}; +infinity if some v_j on the
/// support is infinite.
double omega_weight(const MultiIndex& nu, const WeightRule& v);

/// Lexicographically ordered, downward closed set Lambda = {nu : omega_nu^2 <=
/// s/2, supp nu within 1..tau}.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<MultiIndex> members, std::uint32_t max_dimension, double budget);

  std::size_t size() const noexcept { return members_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<MultiIndex>& members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }
  /// Truncation dimension tau.
  std::uint32_t max_dimension() const noexcept { return tau_; }
  /// Sparsity budget s the set was built for (0 when unknown).
  double budget() const noexcept { return budget_; }

  /// Position of nu in member order, or size() when absent.
  std::size_t find(const MultiIndex& nu) const;
  bool contains(const MultiIndex& nu) const { return find(nu) != size(); }
  bool is_downward_closed() const;

  /// omega_nu for every member, in member order.
  std::vector<double> weights(const WeightRule& v) const;

  /// One member per line in MultiIndex::to_string form.
  std::string to_text() const;
  static IndexSet from_text(const std::string& text);

 private:
  std::vector<MultiIndex> members_;
  std::uint32_t tau_ = 0;
  double budget_ = 0.0;
};

/// Lambda = {nu : omega_nu^2 <= s/2} over dimensions 1..tau, by depth-first
/// search with pruning. Refuses rules that admit infinitely many indices.
IndexSet enumerate_lambda(const WeightRule& v, double s, std::uint32_t tau);

/// Constants of the polynomial-rule cardinality bound N <= C s^{gamma log s}.
/// The defaults dominate enumerated |Lambda| for c in [1.1, 3], alpha in
/// [0.5, 3] and s in [3, 4096] (largest fitted gamma 0.3206 at C = 1).
struct PolynomialBoundConstants {
  double C = 1.0;
  double gamma = 0.33;
};

/// Closed-form upper bound on |Lambda| for constant and polynomial rules.
double cardinality_bound(const WeightRule& v, double s, PolynomialBoundConstants constants = {});

/// m i.i.d. draws from the tensorized arcsine measure on [-1,1]^tau, one draw
/// per row.
Eigen::MatrixXd sample_measure(std::size_t m, std::uint32_t tau, std::uint64_t seed);

}  // namespace wgcs
