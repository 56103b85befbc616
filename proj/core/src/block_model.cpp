#include "wgcs/block_model.hpp"

#include "wgcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace wgcs {

namespace {

void require_same_blocks(const BlockStructure& structure, const WeightSequence& w) {
  if (structure.block_count() != w.size()) {
    throw StructuralError("weight sequence has " + std::to_string(w.size()) +
                          " entries but the structure has " +
                          std::to_string(structure.block_count()) + " blocks");
  }
}

void require_exponents(double q, double p) {
  if (!(p > 0.0)) throw DomainError("mixed norm exponent p must be > 0");
  if (!(q >= 1.0)) throw DomainError("block norm exponent q must be >= 1");
}

// One summand of the weighted mixed norm. Shared by every routine that sums
// residual blocks so that the same support always yields the same bits.
double weighted_term(double norm, double weight, double p) {
  if (norm == 0.0) return 0.0;
  return std::pow(weight, 2.0 - p) * std::pow(norm, p);
}

double block_q_norm(const Eigen::Ref<const Eigen::VectorXd>& v, double q) {
  if (std::isinf(q)) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  if (q == 2.0) return v.norm();
  if (q == 1.0) return v.cwiseAbs().sum();
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), q);
  return std::pow(acc, 1.0 / q);
}

}  // namespace

BlockStructure::BlockStructure(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw StructuralError("block structure needs at least one block");
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (Index d : sizes_) {
    if (d < 1) throw StructuralError("block sizes must be positive");
    offsets_.push_back(offsets_.back() + d);
  }
}

BlockStructure BlockStructure::uniform(std::size_t blocks, Index width) {
  return BlockStructure(std::vector<Index>(blocks, width));
}

Index BlockStructure::min_block_size() const {
  return sizes_.empty() ? 0 : *std::min_element(sizes_.begin(), sizes_.end());
}

BlockSupport::BlockSupport(std::initializer_list<std::size_t> indices)
    : BlockSupport(std::vector<std::size_t>(indices)) {}

BlockSupport::BlockSupport(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw StructuralError("block support contains duplicate indices");
  }
}

void BlockSupport::check_within(std::size_t block_count) const {
  if (!indices_.empty() && indices_.back() >= block_count) {
    throw StructuralError("block index " + std::to_string(indices_.back()) +
                          " out of range for " + std::to_string(block_count) + " blocks");
  }
}

bool BlockSupport::contains(std::size_t b) const {
  return std::binary_search(indices_.begin(), indices_.end(), b);
}

bool BlockSupport::intersects(const BlockSupport& other) const {
  auto a = indices_.begin();
  auto b = other.indices_.begin();
  while (a != indices_.end() && b != other.indices_.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

WeightSequence::WeightSequence(std::vector<double> values) : values_(std::move(values)) {
  max_ = 1.0;
  for (double v : values_) {
    if (!(v >= 1.0) || !std::isfinite(v)) {
      throw DomainError("weights must be finite and >= 1, got " + std::to_string(v));
    }
    max_ = std::max(max_, v);
  }
}

WeightSequence WeightSequence::ones(std::size_t blocks) {
  return WeightSequence(std::vector<double>(blocks, 1.0));
}

double WeightSequence::weight_of(const BlockSupport& support) const {
  support.check_within(values_.size());
  double acc = 0.0;
  for (std::size_t b : support) acc += values_[b] * values_[b];
  return acc;
}

double WeightSequence::total() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return acc;
}

BlockVector::BlockVector(BlockStructure structure)
    : structure_(std::move(structure)), data_(Eigen::VectorXd::Zero(structure_.total_size())) {}

BlockVector::BlockVector(BlockStructure structure, Eigen::VectorXd data)
    : structure_(std::move(structure)), data_(std::move(data)) {
  if (data_.size() != structure_.total_size()) {
    throw StructuralError("vector length " + std::to_string(data_.size()) +
                          " does not match structure size " +
                          std::to_string(structure_.total_size()));
  }
}

Eigen::VectorXd::ConstSegmentReturnType BlockVector::block(std::size_t b) const {
  return data_.segment(structure_.offset(b), structure_.size(b));
}

Eigen::VectorXd::SegmentReturnType BlockVector::block(std::size_t b) {
  return data_.segment(structure_.offset(b), structure_.size(b));
}

Eigen::VectorXd BlockVector::block_norms(double q) const {
  Eigen::VectorXd out(static_cast<Index>(structure_.block_count()));
  for (std::size_t b = 0; b < structure_.block_count(); ++b) {
    out[static_cast<Index>(b)] = block_q_norm(block(b), q);
  }
  return out;
}

BlockSupport BlockVector::support() const {
  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < structure_.block_count(); ++b) {
    if ((block(b).array() != 0.0).any()) active.push_back(b);
  }
  return BlockSupport(std::move(active));
}

BlockVector BlockVector::restricted(const BlockSupport& support) const {
  support.check_within(structure_.block_count());
  BlockVector out(structure_);
  for (std::size_t b : support) out.block(b) = block(b);
  return out;
}

BlockVector BlockVector::operator-(const BlockVector& other) const {
  if (!(structure_ == other.structure_)) throw StructuralError("block structures differ");
  return BlockVector(structure_, data_ - other.data_);
}

double weighted_block_norm_from_norms(const Eigen::VectorXd& block_norms, const WeightSequence& w,
                                      double p) {
  if (static_cast<std::size_t>(block_norms.size()) != w.size()) {
    throw StructuralError("block norm count does not match weight count");
  }
  if (!(p > 0.0)) throw DomainError("mixed norm exponent p must be > 0");
  double acc = 0.0;
  for (Index b = 0; b < block_norms.size(); ++b) {
    acc += weighted_term(block_norms[b], w[static_cast<std::size_t>(b)], p);
  }
  return std::pow(acc, 1.0 / p);
}

double weighted_block_norm(const BlockVector& x, const WeightSequence& w, double q, double p) {
  require_same_blocks(x.structure(), w);
  require_exponents(q, p);
  return weighted_block_norm_from_norms(x.block_norms(q), w, p);
}

double weighted_sparsity(const BlockVector& x, const WeightSequence& w) {
  require_same_blocks(x.structure(), w);
  return w.weight_of(x.support());
}

std::vector<std::size_t> weighted_rearrangement(const Eigen::VectorXd& block_norms,
                                                const WeightSequence& w) {
  if (static_cast<std::size_t>(block_norms.size()) != w.size()) {
    throw StructuralError("block norm count does not match weight count");
  }
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return block_norms[static_cast<Index>(a)] / w[a] > block_norms[static_cast<Index>(b)] / w[b];
  });
  return order;
}

BlockSupport quasi_best_support(const Eigen::VectorXd& block_norms, const WeightSequence& w,
                                double s) {
  if (s < w.max() * w.max()) {
    throw DomainError("quasi-best approximation needs s >= ||w||_inf^2 (s = " +
                      std::to_string(s) + ", ||w||_inf^2 = " + std::to_string(w.max() * w.max()) +
                      ")");
  }
  const auto order = weighted_rearrangement(block_norms, w);
  std::vector<std::size_t> kept;
  double budget = 0.0;
  for (std::size_t b : order) {
    budget += w[b] * w[b];
    if (budget > s) break;
    // Zero blocks sort last; keeping them would not change the approximation.
    if (block_norms[static_cast<Index>(b)] == 0.0) break;
    kept.push_back(b);
  }
  return BlockSupport(std::move(kept));
}

QuasiBestApproximation quasi_best_approximation(const BlockVector& x, const WeightSequence& w,
                                                double s) {
  require_same_blocks(x.structure(), w);
  BlockSupport support = quasi_best_support(x.block_norms(2.0), w, s);
  BlockVector approx = x.restricted(support);
  return {std::move(support), std::move(approx)};
}

double quasi_best_error(const BlockVector& x, const WeightSequence& w, double s, double q,
                        double p) {
  const auto approx = quasi_best_approximation(x, w, s);
  return weighted_block_norm(x - approx.approximation, w, q, p);
}

double best_approximation_bruteforce_from_norms(const Eigen::VectorXd& block_norms,
                                                const WeightSequence& w, double s, double p) {
  const std::size_t blocks = w.size();
  if (static_cast<std::size_t>(block_norms.size()) != blocks) {
    throw StructuralError("block norm count does not match weight count");
  }
  if (blocks > kBruteForceBlockLimit) {
    throw GuardExceeded("brute-force best approximation is limited to " +
                        std::to_string(kBruteForceBlockLimit) + " blocks, got " +
                        std::to_string(blocks));
  }
  if (!(p > 0.0)) throw DomainError("mixed norm exponent p must be > 0");

  std::vector<double> terms(blocks), wsq(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    terms[b] = weighted_term(block_norms[static_cast<Index>(b)], w[b], p);
    wsq[b] = w[b] * w[b];
  }

  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t subsets = std::uint32_t{1} << blocks;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    double budget = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      if (mask & (std::uint32_t{1} << b)) budget += wsq[b];
    }
    if (budget > s) continue;
    double residual = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      if (!(mask & (std::uint32_t{1} << b))) residual += terms[b];
    }
    best = std::min(best, residual);
  }
  return std::pow(best, 1.0 / p);
}

double best_approximation_bruteforce(const BlockVector& x, const WeightSequence& w, double s,
                                     double q, double p) {
  require_same_blocks(x.structure(), w);
  require_exponents(q, p);
  return best_approximation_bruteforce_from_norms(x.block_norms(q), w, s, p);
}

double stechkin_bound(const BlockVector& x, const WeightSequence& w, double s, double p,
                      double q) {
  require_same_blocks(x.structure(), w);
  if (!(q < p && p <= 2.0 && q > 0.0)) {
    throw DomainError("Stechkin bound requires 0 < q < p <= 2");
  }
  const double gap = s - w.max() * w.max();
  if (!(gap > 0.0)) throw DomainError("Stechkin bound requires s > ||w||_inf^2");
  return std::pow(gap, 1.0 / p - 1.0 / q) * weighted_block_norm_from_norms(x.block_norms(2.0), w, q);
}

}  // namespace wgcs
