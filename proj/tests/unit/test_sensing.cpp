#include "doctest.h"

#include "wgcs/error.hpp"
#include "wgcs/sensing.hpp"

#include <cmath>

using namespace wgcs;

namespace {

// delta over every admissible support (not only maximal ones), from the
// eigenvalues of A_S^T A_S.
double exhaustive_delta(const Eigen::MatrixXd& a, const BlockStructure& st, const std::vector<double>& w, double s) {
  const std::size_t blocks = w.size();
  double delta = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << blocks); ++mask) {
    double budget = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t b = 0; b < blocks; ++b) {
      if (mask & (1u << b)) {
        budget += w[b] * w[b];
        idx.push_back(b);
      }
    }
    if (budget > s) continue;
    const Eigen::MatrixXd sub = restrict_columns(a, st, BlockSupport(idx));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub.transpose() * sub);
    const auto& ev = eig.eigenvalues();
    delta = std::max({delta, ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff()});
  }
  return delta;
}

}  // namespace

TEST_CASE("sampling matrix entries and normalization") {
  const auto lambda = enumerate_lambda(WeightRule::explicit_values({1.5, 2.0}), 16.0, 2);
  Eigen::MatrixXd y(2, 2);
  y << 1.0, 0.0, 0.5, -1.0;
  const auto raw = build_sampling_matrix(lambda, y, false);
  CHECK_FALSE(raw.normalized);
  CHECK(raw.provenance == MatrixProvenance::orthonormal_system);
  // columns 0, e1, e2
  CHECK(raw.entries(0, 0) == 1.0);
  CHECK(raw.entries(0, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(raw.entries(0, 2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(raw.entries(1, 1) == doctest::Approx(std::sqrt(2.0) * 0.5));
  CHECK(raw.entries(1, 2) == doctest::Approx(-std::sqrt(2.0)));
  const auto scaled = build_sampling_matrix(lambda, y, true);
  CHECK(scaled.entries.isApprox(raw.entries / std::sqrt(2.0), 1e-15));

  Eigen::MatrixXd bad = y;
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(build_sampling_matrix(lambda, bad, true), DomainError);
  CHECK_THROWS_AS(build_sampling_matrix(lambda, Eigen::MatrixXd::Zero(2, 1), true), StructuralError);
}

TEST_CASE("random ensembles are seeded and scaled") {
  const auto a = random_matrix(RandomEnsemble::gaussian, 200, 300, 4);
  CHECK(a.entries == random_matrix(RandomEnsemble::gaussian, 200, 300, 4).entries);
  // E ||column||^2 = 1 after the 1/sqrt(m) scaling
  CHECK(a.entries.colwise().squaredNorm().mean() == doctest::Approx(1.0).epsilon(0.02));
  const auto r = random_matrix(RandomEnsemble::rademacher, 16, 10, 1);
  CHECK((r.entries.array().abs() - 0.25).abs().maxCoeff() <= 1e-15);
  const auto u = random_matrix(RandomEnsemble::uniform, 400, 200, 2);
  CHECK(u.entries.colwise().squaredNorm().mean() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(u.entries.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 400.0));
}

TEST_CASE("maximal and admissible supports") {
  const WeightSequence w({1.0, 2.0, 1.0});
  // budget 4: {0,2} (2), {1} (4); {0,1} costs 5
  const auto maximal = maximal_supports(w, 4.0);
  REQUIRE(maximal.size() == 2);
  CHECK(maximal[0] == BlockSupport({0, 2}));
  CHECK(maximal[1] == BlockSupport({1}));
  // {}, {0}, {1}, {2}, {0,2}
  CHECK(count_admissible_supports(w, 4.0) == 5);
  CHECK_THROWS_AS(count_admissible_supports(WeightSequence::ones(30), 30.0, 1000), GuardExceeded);
}

TEST_CASE("empirical WBRIP agrees with an eigenvalue oracle over all supports") {
  const auto st = BlockStructure({1, 2, 1, 2, 1, 1});
  const std::vector<double> wv{1.0, 1.3, 1.0, 1.6, 1.1, 1.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = random_matrix(RandomEnsemble::gaussian, 12, st.total_size(), seed);
    for (double s : {1.0, 2.5, 4.0, 6.0}) {
      const auto est = empirical_wbrip(a, st, WeightSequence(wv), s);
      CHECK(est.delta == doctest::Approx(exhaustive_delta(a.entries, st, wv, s)).epsilon(1e-10));
      CHECK(est.delta >= std::max(est.max_sq_singular - 1.0, 1.0 - est.min_sq_singular) - 1e-15);
    }
  }
}

TEST_CASE("empirical WBRIP edge cases") {
  SensingMatrix id{Eigen::MatrixXd::Identity(5, 5), true, MatrixProvenance::external};
  CHECK(empirical_wbrip(id, BlockStructure::uniform(5, 1), WeightSequence::ones(5), 3.0).delta ==
        doctest::Approx(0.0).epsilon(1e-15));
  // more columns than rows forces sigma_min = 0, so delta >= 1
  const auto wide = random_matrix(RandomEnsemble::gaussian, 2, 6, 3);
  CHECK(empirical_wbrip(wide, BlockStructure::uniform(6, 1), WeightSequence::ones(6), 3.0).delta >= 1.0);
  CHECK_THROWS_AS(empirical_wbrip(wide, BlockStructure::uniform(5, 1), WeightSequence::ones(5), 3.0),
                  StructuralError);
}

TEST_CASE("WBRIP is independent of the thread count") {
  const auto a = random_matrix(RandomEnsemble::gaussian, 10, 14, 8);
  const auto st = BlockStructure::uniform(14, 1);
  const auto one = empirical_wbrip(a, st, WeightSequence::ones(14), 3.0, 1);
  const auto many = empirical_wbrip(a, st, WeightSequence::ones(14), 3.0, 4);
  CHECK(one.delta == many.delta);
  CHECK(one.worst_support == many.worst_support);
}

TEST_CASE("Kronecker layout and tensor equivalence") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  const auto k = kronecker_identity(a, 2);
  CHECK(k(0, 0) == 1);
  CHECK(k(1, 1) == 1);
  CHECK(k(0, 2) == 2);
  CHECK(k(3, 3) == 4);
  CHECK(k(0, 1) == 0);

  const auto g = random_matrix(RandomEnsemble::gaussian, 6, 8, 12);
  const WeightSequence w({1.0, 1.2, 1.0, 1.1, 1.0, 1.4, 1.0, 1.0});
  for (Index d : {1, 2, 3}) {
    const auto cmp = tensor_rip_equivalence(g, d, w, 3.0);
    CHECK(cmp.materialized);
    CHECK(std::abs(cmp.delta_scalar - cmp.delta_block) <= 1e-10);
  }
  CHECK(max_block_count(BlockStructure({2, 3, 2})) == 4);
}

TEST_CASE("disjoint-support coherence") {
  const auto st = BlockStructure::uniform(8, 2);
  const auto a = random_matrix(RandomEnsemble::gaussian, 10, 16, 21);
  const WeightSequence w = WeightSequence::ones(8);
  const auto check = disjoint_coherence_check(a, st, w, 2.0, 1.0, 300, 5);
  CHECK(check.pairs > 0);
  CHECK(check.worst_ratio <= check.delta_s_plus_t + 1e-10);

  BlockVector u(st), v(st);
  u.block(0).setOnes();
  v.block(0).setOnes();
  CHECK_THROWS_AS(coherence_ratio(a.entries, u, v), DomainError);
  BlockVector zero(st);
  CHECK(coherence_ratio(a.entries, u, zero) == 0.0);
}
