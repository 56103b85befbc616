#pragma once

// Block structures, weighted mixed norms and weighted s-term approximations.
//
// Block indices are 0-based throughout the C++ API.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace wgcs {

using Index = Eigen::Index;

/// Partition of {0, ..., N-1} into B contiguous blocks.
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<Index> sizes);

  /// B blocks of identical width.
  static BlockStructure uniform(std::size_t blocks, Index width);

  std::size_t block_count() const noexcept { return sizes_.size(); }
  Index total_size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  Index offset(std::size_t b) const { return offsets_.at(b); }
  Index size(std::size_t b) const { return sizes_.at(b); }
  Index min_block_size() const;

  const std::vector<Index>& sizes() const noexcept { return sizes_; }
  /// B + 1 prefix sums; offsets().front() == 0, offsets().back() == N.
  const std::vector<Index>& offsets() const noexcept { return offsets_; }

  bool operator==(const BlockStructure&) const = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

/// Set of block indices, kept sorted and duplicate free.
class BlockSupport {
 public:
  BlockSupport() = default;
  BlockSupport(std::initializer_list<std::size_t> indices);
  explicit BlockSupport(std::vector<std::size_t> indices);

  /// Throws StructuralError if any index is >= block_count.
  void check_within(std::size_t block_count) const;

  bool contains(std::size_t b) const;
  bool intersects(const BlockSupport& other) const;
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool operator==(const BlockSupport&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

/// Per-block weights, all >= 1.
class WeightSequence {
 public:
  WeightSequence() = default;
  explicit WeightSequence(std::vector<double> values);

  static WeightSequence ones(std::size_t blocks);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t b) const { return values_[b]; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// ||w||_inf
  double max() const noexcept { return max_; }
  /// Weighted cardinality sum_{b in S} w_b^2.
  double weight_of(const BlockSupport& support) const;
  /// sum_b w_b^2
  double total() const;

 private:
  std::vector<double> values_;
  double max_ = 1.0;
};

/// Flat vector partitioned by a BlockStructure.
class BlockVector {
 public:
  explicit BlockVector(BlockStructure structure);
  BlockVector(BlockStructure structure, Eigen::VectorXd data);

  const BlockStructure& structure() const noexcept { return structure_; }
  const Eigen::VectorXd& data() const noexcept { return data_; }
  Eigen::VectorXd& data() noexcept { return data_; }

  Eigen::VectorXd::ConstSegmentReturnType block(std::size_t b) const;
  Eigen::VectorXd::SegmentReturnType block(std::size_t b);

  /// ||x[b]||_q for every block; q may be +infinity.
  Eigen::VectorXd block_norms(double q = 2.0) const;

  /// Blocks whose stored entries are not all exactly zero.
  BlockSupport support() const;

  /// Copy with every block outside `support` set to zero.
  BlockVector restricted(const BlockSupport& support) const;

  BlockVector operator-(const BlockVector& other) const;

 private:
  BlockStructure structure_;
  Eigen::VectorXd data_;
};

/// (sum_b w_b^{2-p} ||x[b]||_q^p)^{1/p}
double weighted_block_norm(const BlockVector& x, const WeightSequence& w, double q, double p);

/// Same mixed norm evaluated from precomputed block norms.
double weighted_block_norm_from_norms(const Eigen::VectorXd& block_norms, const WeightSequence& w,
                                      double p);

/// sum of w_b^2 over blocks that are not identically zero.
double weighted_sparsity(const BlockVector& x, const WeightSequence& w);

/// Block order by non-increasing ||x[b]||_2 / w_b, ties broken by block index.
std::vector<std::size_t> weighted_rearrangement(const Eigen::VectorXd& block_norms,
                                                const WeightSequence& w);

/// Support of the quasi-best weighted s-term approximation computed from
/// block 2-norms. Requires s >= ||w||_inf^2.
BlockSupport quasi_best_support(const Eigen::VectorXd& block_norms, const WeightSequence& w,
                                double s);

struct QuasiBestApproximation {
  BlockSupport support;
  BlockVector approximation;
};

QuasiBestApproximation quasi_best_approximation(const BlockVector& x, const WeightSequence& w,
                                                double s);

/// ||x - quasi_best(x, s)||_{q,p}^{(w)}
double quasi_best_error(const BlockVector& x, const WeightSequence& w, double s, double q,
                        double p);

inline constexpr std::size_t kBruteForceBlockLimit = 20;

/// Exact sigma_s(x)_{q,p}^{(w)} by enumerating every support with w(S) <= s.
/// Refuses more than kBruteForceBlockLimit blocks.
double best_approximation_bruteforce(const BlockVector& x, const WeightSequence& w, double s,
                                     double q, double p);

/// Brute-force sigma_s from precomputed block norms.
double best_approximation_bruteforce_from_norms(const Eigen::VectorXd& block_norms,
                                                const WeightSequence& w, double s, double p);

/// (s - ||w||_inf^2)^{1/p - 1/q} ||x||_{2,q}^{(w)}, valid for q < p <= 2 and
/// s > ||w||_inf^2.
double stechkin_bound(const BlockVector& x, const WeightSequence& w, double s, double p, double q);

}  // namespace wgcs
