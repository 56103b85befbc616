#include "doctest.h"

#include "wgcs/error.hpp"
#include "wgcs/sensing.hpp"
#include "wgcs/solver.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace wgcs;

namespace {

struct Planted {
  Eigen::MatrixXd a, x, y;
};

Planted planted(std::uint64_t seed, Index m = 40, std::size_t blocks = 16, Index width = 4,
                int active = 3, Index cols = 1) {
  Planted p;
  p.a = random_matrix(RandomEnsemble::gaussian, m, static_cast<Index>(blocks) * width, seed).entries;
  std::mt19937_64 gen(seed + 77);
  std::normal_distribution<double> nd;
  std::vector<std::size_t> order(blocks);
  for (std::size_t b = 0; b < blocks; ++b) order[b] = b;
  std::shuffle(order.begin(), order.end(), gen);
  p.x = Eigen::MatrixXd::Zero(static_cast<Index>(blocks) * width, cols);
  for (int k = 0; k < active; ++k)
    for (Index i = 0; i < width; ++i)
      for (Index c = 0; c < cols; ++c) p.x(static_cast<Index>(order[k]) * width + i, c) = nd(gen);
  p.y = p.a * p.x;
  return p;
}

// For A = I the problem separates: Z_b = Y_b max(0, 1 - lambda w_b / ||Y_b||)
// with lambda chosen by bisection so that ||Z - Y|| = eta.
Eigen::MatrixXd identity_oracle(const Eigen::MatrixXd& y, const BlockStructure& rows,
                                const std::vector<double>& w, double eta) {
  auto shrink = [&](double lambda) {
    Eigen::MatrixXd z = y;
    for (std::size_t b = 0; b < w.size(); ++b) {
      auto blk = z.middleRows(rows.offset(b), rows.size(b));
      const double n = blk.norm();
      blk *= n > lambda * w[b] ? 1.0 - lambda * w[b] / n : 0.0;
    }
    return z;
  };
  double lo = 0.0, hi = 1.0;
  while ((shrink(hi) - y).norm() < eta) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((shrink(mid) - y).norm() < eta ? lo : hi) = mid;
  }
  return shrink(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("block soft threshold") {
  Eigen::VectorXd v(2);
  v << 3, 4;
  CHECK(block_soft_threshold(v, 5.0).isZero(0.0));
  CHECK(block_soft_threshold(v, 0.0) == v);
  const auto r = block_soft_threshold(v, 2.5);
  CHECK(r[0] == doctest::Approx(1.5));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(block_soft_threshold(Eigen::VectorXd::Zero(3), 1.0).isZero(0.0));
  CHECK_THROWS_AS(block_soft_threshold(v, -1.0), DomainError);
}

TEST_CASE("weighted group norm") {
  Eigen::MatrixXd z(3, 2);
  z << 3, 4, 0, 0, 1, 0;
  CHECK(weighted_group_norm(z, BlockStructure::uniform(3, 1), WeightSequence({2.0, 5.0, 1.0})) ==
        doctest::Approx(11.0));
  CHECK(weighted_group_norm(z, BlockStructure({2, 1}), WeightSequence({1.0, 3.0})) == doctest::Approx(8.0));
}

TEST_CASE("trivial solves") {
  const auto rows = BlockStructure::uniform(4, 1);
  const auto w = WeightSequence::ones(4);
  const Eigen::MatrixXd a = random_matrix(RandomEnsemble::gaussian, 3, 4, 1).entries;
  const auto zero = solve_wg_bpdn(a, Eigen::MatrixXd::Zero(3, 2), rows, w, 0.0);
  CHECK(zero.converged());
  CHECK(zero.z.isZero(0.0));

  Eigen::MatrixXd y(4, 2);
  y << 1, -2, 0.5, 0, 0, 3, -1, 1;
  const auto id = solve_wg_bpdn(Eigen::MatrixXd::Identity(4, 4), y, rows, w, 0.0);
  CHECK(id.converged());
  CHECK((id.z - y).norm() <= 1e-7 * y.norm());
}

TEST_CASE("exact recovery of a planted block-sparse vector") {
  const auto rows = BlockStructure::uniform(16, 4);
  const auto w = WeightSequence::ones(16);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = planted(seed);
    const auto r = solve_wg_bpdn(p.a, p.y, rows, w, 0.0);
    CHECK(r.converged());
    CHECK((r.z - p.x).norm() / p.x.norm() <= 1e-4);
    const auto cert = kkt_certificate(r.z, p.a, p.y, rows, w, 0.0, r.dual);
    CHECK(cert.passes(1e-6));
    CHECK(r.constraint_activity <= 1e-8 * (1.0 + p.y.norm()));
  }
}

TEST_CASE("identity sensing with noise matches the closed-form shrinkage") {
  const auto rows = BlockStructure({2, 1, 3, 2});
  const std::vector<double> wv{1.0, 1.5, 1.2, 2.0};
  Eigen::MatrixXd y(8, 3);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  for (Index i = 0; i < y.size(); ++i) y.data()[i] = nd(gen);
  const double eta = 0.3 * y.norm();
  const auto r = solve_wg_bpdn(Eigen::MatrixXd::Identity(8, 8), y, rows, WeightSequence(wv), eta);
  CHECK(r.converged());
  const auto oracle = identity_oracle(y, rows, wv, eta);
  CHECK((r.z - oracle).norm() <= 1e-6 * oracle.norm());
  CHECK(r.constraint_activity == doctest::Approx(eta).epsilon(1e-6));
  const auto cert = kkt_certificate(r.z, Eigen::MatrixXd::Identity(8, 8), y, rows, WeightSequence(wv), eta, r.dual);
  CHECK(cert.passes(1e-6));
  // the dual built from the residual certifies the same point
  CHECK(kkt_certificate(r.z, Eigen::MatrixXd::Identity(8, 8), y, rows, WeightSequence(wv), eta).passes(1e-6));
}

TEST_CASE("KKT certificate: slack constraint and negative control") {
  const auto rows = BlockStructure::uniform(16, 4);
  const auto w = WeightSequence::ones(16);
  const auto p = planted(9);
  // eta above ||Y||: zero is optimal, Lambda = 0
  const auto slack = kkt_certificate(Eigen::MatrixXd::Zero(64, 1), p.a, p.y, rows, w, 2.0 * p.y.norm());
  CHECK(slack.passes(1e-12));
  CHECK(slack.dual_scale == 0.0);

  const auto r = solve_wg_bpdn(p.a, p.y, rows, w, 0.0);
  Eigen::MatrixXd bent = r.z;
  for (Index i = 0; i < bent.rows(); ++i) {
    if (bent(i, 0) != 0.0) {
      bent(i, 0) *= 1.5;
      break;
    }
  }
  const auto cert = kkt_certificate(bent, p.a, p.y, rows, w, 0.0, r.dual);
  CHECK(cert.active_misalignment > 1e-6);
  CHECK_FALSE(cert.passes(1e-6));
}

TEST_CASE("infeasible data and iteration cap") {
  const auto rows = BlockStructure::uniform(3, 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  Eigen::MatrixXd y(3, 1);
  y << 1, 1, 1;
  CHECK_THROWS_AS(solve_wg_bpdn(a, y, rows, WeightSequence::ones(3), 0.5), InfeasibleError);
  const auto ok = solve_wg_bpdn(a, y, rows, WeightSequence::ones(3), 1.0 + 1e-3);
  CHECK(ok.converged());
  CHECK(ok.range_distance == doctest::Approx(1.0));

  const auto p = planted(5);
  SolveSettings tight;
  tight.max_iterations = 5;
  const auto capped = solve_wg_bpdn(p.a, p.y, BlockStructure::uniform(16, 4), WeightSequence::ones(16), 0.0, tight);
  CHECK_FALSE(capped.converged());
  CHECK(capped.iterations == 5);
  CHECK_THROWS_AS(solve_wg_bpdn(p.a, p.y, BlockStructure::uniform(15, 4), WeightSequence::ones(15), 0.0),
                  StructuralError);
  CHECK_THROWS_AS(solve_wg_bpdn(p.a, p.y, BlockStructure::uniform(16, 4), WeightSequence::ones(16), -1.0),
                  DomainError);
}

TEST_CASE("scaling covariance and column permutation symmetry") {
  const auto rows = BlockStructure::uniform(16, 1);
  const WeightSequence w({1, 1.2, 1, 1.5, 1, 1, 2, 1, 1.1, 1, 1, 1.3, 1, 1, 1, 1});
  const auto p = planted(13, 12, 16, 1, 3, 3);
  Eigen::MatrixXd y = p.y;
  y.col(0) += 0.01 * Eigen::VectorXd::Ones(12);
  const double eta = 0.05;
  SolveSettings tight;
  tight.primal_tolerance = tight.dual_tolerance = 1e-10;
  const auto base = solve_wg_bpdn(p.a, y, rows, w, eta, tight);
  const auto scaled = solve_wg_bpdn(p.a, 7.0 * y, rows, w, 7.0 * eta, tight);
  CHECK(base.converged());
  CHECK(scaled.converged());
  CHECK((scaled.z - 7.0 * base.z).norm() <= 1e-5 * (7.0 * base.z.norm()));

  Eigen::MatrixXd perm(12, 3);
  perm << y.col(2), y.col(0), y.col(1);
  const auto swapped = solve_wg_bpdn(p.a, perm, rows, w, eta, tight);
  Eigen::MatrixXd expect(16, 3);
  expect << base.z.col(2), base.z.col(0), base.z.col(1);
  CHECK((swapped.z - expect).norm() <= 1e-5 * base.z.norm());
}

TEST_CASE("objective history is non-increasing") {
  const auto p = planted(21);
  SolveSettings s;
  s.record_history = true;
  const auto r = solve_wg_bpdn(p.a, p.y, BlockStructure::uniform(16, 4), WeightSequence::ones(16), 0.01, s);
  REQUIRE(r.objective_history.size() >= 2);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
  }
}

TEST_CASE("recovery constants") {
  const auto zero = recovery_constants(0.0);
  CHECK(zero.c == doctest::Approx(2.0));
  CHECK(zero.d == doctest::Approx(6.0));
  CHECK(zero.rho == 0.0);
  CHECK(zero.tau == 1.0);
  CHECK(recovery_constants(0.2).rho == doctest::Approx(2.0 * std::numbers::sqrt2 * 0.2 / 0.8));
  CHECK(recovery_constants(0.2).rho < 1.0);
  CHECK(recovery_delta_threshold() == doctest::Approx(1.0 / (2.0 * std::numbers::sqrt2 + 1.0)));
  CHECK_THROWS_AS(recovery_constants(recovery_delta_threshold()), DomainError);
  CHECK_THROWS_AS(recovery_constants(-0.1), DomainError);
  RecoveryConstants prev = zero;
  for (double t = 0.01; t < 0.999; t += 0.01) {
    const auto k = recovery_constants(t * recovery_delta_threshold());
    CHECK(k.c > prev.c);
    CHECK(k.d > prev.d);
    CHECK(k.rho > prev.rho);
    CHECK(k.tau > prev.tau);
    prev = k;
  }
  CHECK(recovery_constants(recovery_delta_threshold() * (1 - 1e-9)).c > 1e6);
}

TEST_CASE("error bounds and the null space chain on a certified instance") {
  const auto rows = BlockStructure::uniform(8, 1);
  const auto w = WeightSequence::ones(8);
  const auto p = planted(3, 1000, 8, 1, 1, 1);
  // exact recovery: sigma_s = 0 and eta = 0 give bounds 0 >= 0
  const auto exact = error_bound(p.x, p.x, rows, w, 2.0, 0.1, 0.0);
  CHECK(exact.sigma_s == 0.0);
  CHECK(exact.l21_bound == 0.0);
  CHECK(exact.l2_margin() == 0.0);
  CHECK(exact.budget_admissible);

  const SensingMatrix a{p.a, true, MatrixProvenance::gaussian};
  const double s = 2.0;
  const double delta = empirical_wbrip(a, rows, w, 2.0 * s).delta;
  REQUIRE(delta < recovery_delta_threshold());
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x = p.x + 0.05 * Eigen::MatrixXd::NullaryExpr(8, 1, [&] { return nd(gen); });
  Eigen::MatrixXd y = p.a * x;
  const double eta = 0.02;
  y += eta / std::sqrt(1000.0) * Eigen::MatrixXd::NullaryExpr(1000, 1, [&] { return nd(gen) > 0 ? 0.5 : -0.5; });
  const auto r = solve_wg_bpdn(p.a, y, rows, w, eta);
  REQUIRE(r.converged());
  const auto report = error_bound(r.z, x, rows, w, s, delta, eta);
  CHECK(report.l21_margin() >= 0.0);
  CHECK(report.l2_margin() >= 0.0);
  const auto k = recovery_constants(delta);
  const auto chain = nsp_bound_check(r.z, x, p.a, rows, w, s, k.rho, k.tau);
  CHECK(chain.margin() >= 0.0);
  CHECK_THROWS_AS(nsp_bound_check(r.z, x, p.a, rows, w, s, 1.0, 1.0), DomainError);
}
