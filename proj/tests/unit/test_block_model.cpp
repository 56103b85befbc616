#include "doctest.h"

#include "wgcs/block_model.hpp"
#include "wgcs/error.hpp"

#include <cmath>
#include <random>

using namespace wgcs;

namespace {

BlockVector make(std::vector<Index> sizes, std::vector<double> values) {
  Eigen::VectorXd data = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
  return BlockVector(BlockStructure(std::move(sizes)), data);
}

// Direct evaluation of (sum_b w_b^{2-p} ||x_b||_q^p)^{1/p} with explicit loops.
double direct_mixed_norm(const BlockVector& x, const std::vector<double>& w, double q, double p) {
  double acc = 0.0;
  for (std::size_t b = 0; b < w.size(); ++b) {
    double inner = 0.0;
    for (Index i = 0; i < x.block(b).size(); ++i) inner += std::pow(std::abs(x.block(b)[i]), q);
    inner = std::pow(inner, 1.0 / q);
    acc += std::pow(w[b], 2.0 - p) * std::pow(inner, p);
  }
  return std::pow(acc, 1.0 / p);
}

// Exhaustive sigma_s by recursion over include/exclude decisions.
double recursive_sigma(const std::vector<double>& norms, const std::vector<double>& w, double s,
                       double p) {
  double best = INFINITY;
  auto rec = [&](auto&& self, std::size_t b, double budget, double residual) -> void {
    if (b == norms.size()) {
      best = std::min(best, residual);
      return;
    }
    self(self, b + 1, budget, residual + std::pow(w[b], 2.0 - p) * std::pow(norms[b], p));
    if (budget + w[b] * w[b] <= s) self(self, b + 1, budget + w[b] * w[b], residual);
  };
  rec(rec, 0, 0.0, 0.0);
  return std::pow(best, 1.0 / p);
}

}  // namespace

TEST_CASE("block structure offsets and validation") {
  BlockStructure st({2, 3, 1});
  CHECK(st.block_count() == 3);
  CHECK(st.total_size() == 6);
  CHECK(st.offsets() == std::vector<Index>{0, 2, 5, 6});
  CHECK(st.min_block_size() == 1);
  CHECK_THROWS_AS(BlockStructure({2, 0}), StructuralError);
  CHECK_THROWS_AS(BlockStructure(std::vector<Index>{}), StructuralError);
  CHECK_THROWS_AS(BlockVector(st, Eigen::VectorXd::Zero(5)), StructuralError);
}

TEST_CASE("weights below one are rejected") {
  CHECK_THROWS_AS(WeightSequence({1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(WeightSequence({1.0, INFINITY}), DomainError);
  WeightSequence w({1.0, 3.0});
  CHECK(w.max() == 3.0);
  CHECK(w.total() == 10.0);
}

TEST_CASE("block support is sorted and duplicate free") {
  BlockSupport s({3, 1, 2});
  CHECK(s.indices() == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(BlockSupport({1, 1}), StructuralError);
  CHECK_THROWS_AS(s.check_within(3), StructuralError);
  CHECK(s.intersects(BlockSupport({0, 3})));
  CHECK_FALSE(s.intersects(BlockSupport({0, 4})));
}

TEST_CASE("weighted block norm examples") {
  const auto x = make({2, 2}, {3, 4, 0, 0});
  const WeightSequence w({2.0, 1.0});
  // 2^{2-1} * ||(3,4)||_2 = 2 * 5
  CHECK(weighted_block_norm(x, w, 2.0, 1.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(weighted_block_norm(x, w, 2.0, 2.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(weighted_block_norm(make({2, 2}, {0, 0, 0, 0}), w, 2.0, 1.0) == 0.0);
  CHECK_THROWS_AS(weighted_block_norm(x, w, 2.0, 0.0), DomainError);
  CHECK_THROWS_AS(weighted_block_norm(x, WeightSequence({1.0}), 2.0, 1.0), StructuralError);
}

TEST_CASE("weighted block norm matches direct evaluation and reduces to lp") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> uw(1.0, 3.0), up(0.3, 2.0), uq(1.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Index> sizes{1, 3, 2, 4};
    std::vector<double> vals(10), w(4);
    for (auto& v : vals) v = nd(gen);
    for (auto& v : w) v = uw(gen);
    const auto x = make(sizes, vals);
    const double p = up(gen), q = uq(gen);
    CHECK(weighted_block_norm(x, WeightSequence(w), q, p) ==
          doctest::Approx(direct_mixed_norm(x, w, q, p)).epsilon(1e-12));
  }
  // unit blocks, unit weights, p = q: the plain l_p norm
  const auto x = make({1, 1, 1}, {1.0, -2.0, 2.0});
  CHECK(weighted_block_norm(x, WeightSequence::ones(3), 3.0, 3.0) ==
        doctest::Approx(std::cbrt(17.0)).epsilon(1e-14));
}

TEST_CASE("weighted sparsity") {
  const WeightSequence w({2.0, 1.0});
  CHECK(weighted_sparsity(make({2, 2}, {3, 4, 0, 0}), w) == 4.0);
  CHECK(weighted_sparsity(make({2, 2}, {0, 0, 0, 0}), w) == 0.0);
  CHECK(weighted_sparsity(make({1, 1, 1}, {1, 2, 3}), WeightSequence::ones(3)) == 3.0);
  // exact zero test: a denormal still counts as nonzero
  CHECK(weighted_sparsity(make({1, 1}, {1e-310, 0}), WeightSequence::ones(2)) == 1.0);
}

TEST_CASE("quasi-best approximation examples") {
  // block norms (5, 3, 2), weights (1, 2, 1): ratios (5, 1.5, 2)
  const auto x = make({1, 1, 1}, {5, 3, 2});
  const WeightSequence w({1.0, 2.0, 1.0});
  auto qb = quasi_best_approximation(x, w, 4.0);
  // s = 4 admits the first two of pi = (1, 3, 2): weights 1 + 1 = 2, adding 4 exceeds
  CHECK(qb.support == BlockSupport({0, 2}));
  CHECK_THROWS_AS(quasi_best_approximation(x, w, 2.0), DomainError);

  const WeightSequence ones = WeightSequence::ones(3);
  CHECK(quasi_best_approximation(x, ones, 2.0).support == BlockSupport({0, 1}));

  // large budget: S = bsupp(x), zero residual
  const auto y = make({2, 1, 1}, {1, 0, 0, 2});
  auto full = quasi_best_approximation(y, w, 100.0);
  CHECK(full.support == BlockSupport({0, 2}));
  CHECK(quasi_best_error(y, w, 100.0, 2.0, 1.0) == 0.0);

  const auto single = make({1, 1, 1}, {0, 7, 0});
  CHECK(quasi_best_approximation(single, w, 4.0).support == BlockSupport({1}));
}

TEST_CASE("rearrangement breaks ties by block index") {
  Eigen::VectorXd norms(4);
  norms << 2, 4, 2, 4;
  const auto order = weighted_rearrangement(norms, WeightSequence({1.0, 2.0, 1.0, 1.0}));
  // ratios (2, 2, 2, 4)
  CHECK(order == std::vector<std::size_t>{3, 0, 1, 2});
}

TEST_CASE("brute-force best approximation examples") {
  const auto x = make({2, 2, 2}, {3, 4, 1, 0, 0, 2});
  const auto ones = WeightSequence::ones(3);
  CHECK(best_approximation_bruteforce(x, ones, 1.0, 2.0, 1.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(best_approximation_bruteforce(x, ones, 3.0, 2.0, 1.0) == 0.0);
  const BlockVector big(BlockStructure::uniform(21, 1));
  CHECK_THROWS_AS(best_approximation_bruteforce(big, WeightSequence::ones(21), 2.0, 2.0, 1.0),
                  GuardExceeded);
}

TEST_CASE("brute force agrees with an independent recursion and bounds quasi-best") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> uw(1.0, 2.0), us(0.0, 6.0), up(0.5, 2.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t blocks = 2 + trial % 7;
    std::vector<double> vals(2 * blocks), w(blocks);
    for (auto& v : vals) v = nd(gen);
    for (auto& v : w) v = uw(gen);
    const auto x = make(std::vector<Index>(blocks, 2), vals);
    const WeightSequence ws(w);
    const double s = ws.max() * ws.max() + us(gen);
    const double p = up(gen);
    std::vector<double> norms(blocks);
    for (std::size_t b = 0; b < blocks; ++b) norms[b] = x.block(b).norm();
    const double bf = best_approximation_bruteforce(x, ws, s, 2.0, p);
    CHECK(bf == doctest::Approx(recursive_sigma(norms, w, s, p)).epsilon(1e-12));
    if (bf > quasi_best_error(x, ws, s, 2.0, p)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("sigma_s is non-increasing in s and sparsity is bounded by the total weight") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  const WeightSequence w({1.0, 1.5, 1.2, 2.0, 1.1});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> vals(5);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = trial % 3 == 0 && i % 2 == 0 ? 0.0 : nd(gen);
    const auto x = make({1, 1, 1, 1, 1}, vals);
    double prev = INFINITY;
    for (double s = 0.0; s <= 12.0; s += 0.5) {
      const double cur = best_approximation_bruteforce(x, w, s, 2.0, 1.0);
      CHECK(cur <= prev);
      prev = cur;
    }
    CHECK(weighted_sparsity(x, w) <= w.total());
  }
}

TEST_CASE("Stechkin bound") {
  const auto zero = make({1, 1}, {0, 0});
  CHECK(stechkin_bound(zero, WeightSequence::ones(2), 2.0, 2.0, 1.0) == 0.0);
  CHECK_THROWS_AS(stechkin_bound(zero, WeightSequence::ones(2), 1.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(stechkin_bound(zero, WeightSequence::ones(2), 3.0, 1.0, 1.0), DomainError);

  // unit weights and blocks, q = 1, p = 2: (s - 1)^{-1/2} ||x||_1
  const auto x = make({1, 1, 1, 1}, {4, -3, 2, 1});
  CHECK(stechkin_bound(x, WeightSequence::ones(4), 3.0, 2.0, 1.0) ==
        doctest::Approx(10.0 / std::sqrt(2.0)).epsilon(1e-14));

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> uw(1.0, 2.0), us(0.1, 8.0), uu(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> vals(8), w(8);
    for (auto& v : vals) v = nd(gen);
    for (auto& v : w) v = uw(gen);
    const auto y = make(std::vector<Index>(8, 1), vals);
    const WeightSequence ws(w);
    const double s = ws.max() * ws.max() + us(gen);
    const double p = 0.5 + 1.5 * uu(gen);
    const double q = p * (0.1 + 0.85 * uu(gen));
    const double bound = stechkin_bound(y, ws, s, p, q);
    const double quasi = quasi_best_error(y, ws, s, 2.0, p);
    const double best = best_approximation_bruteforce(y, ws, s, 2.0, p);
    if (!(best <= quasi && quasi <= bound)) ++violations;
  }
  CHECK(violations == 0);
}
