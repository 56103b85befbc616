#include "wgcs/sensing.hpp"

#include "wgcs/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wgcs {

std::string to_string(MatrixProvenance provenance) {
  switch (provenance) {
    case MatrixProvenance::orthonormal_system: return "orthonormal-system";
    case MatrixProvenance::gaussian: return "gaussian";
    case MatrixProvenance::rademacher: return "rademacher";
    case MatrixProvenance::uniform: return "uniform";
    case MatrixProvenance::external: return "external";
  }
  return "external";
}

SensingMatrix build_sampling_matrix(const IndexSet& lambda, const Eigen::MatrixXd& samples,
                                    bool normalize) {
  const Index m = samples.rows();
  const Index n = static_cast<Index>(lambda.size());
  if (m < 1 || n < 1) throw StructuralError("sampling matrix needs at least one sample and index");
  if (samples.cols() < static_cast<Index>(lambda.max_dimension())) {
    throw StructuralError("samples cover " + std::to_string(samples.cols()) +
                          " dimensions but the index set uses " +
                          std::to_string(lambda.max_dimension()));
  }
  if ((samples.array().abs() > 1.0).any()) {
    throw DomainError("sampling points must lie in [-1, 1]^tau");
  }

  SensingMatrix out;
  out.entries.resize(m, n);
  out.normalized = normalize;
  out.provenance = MatrixProvenance::orthonormal_system;
  const double scale = normalize ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
  std::vector<double> y(static_cast<std::size_t>(samples.cols()));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < samples.cols(); ++j) y[static_cast<std::size_t>(j)] = samples(i, j);
    for (Index k = 0; k < n; ++k) {
      out.entries(i, k) = scale * tensor_chebyshev_eval(lambda[static_cast<std::size_t>(k)], y);
    }
  }
  return out;
}

SensingMatrix random_matrix(RandomEnsemble kind, Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw DomainError("random matrix needs m, N >= 1");
  std::mt19937_64 gen(seed);
  SensingMatrix out;
  out.entries.resize(m, n);
  out.normalized = true;
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));

  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> box(-std::sqrt(3.0), std::sqrt(3.0));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      double value = 0.0;
      switch (kind) {
        case RandomEnsemble::gaussian: value = normal(gen); break;
        case RandomEnsemble::rademacher: value = coin(gen) ? 1.0 : -1.0; break;
        case RandomEnsemble::uniform: value = box(gen); break;
      }
      out.entries(i, j) = scale * value;
    }
  }
  switch (kind) {
    case RandomEnsemble::gaussian: out.provenance = MatrixProvenance::gaussian; break;
    case RandomEnsemble::rademacher: out.provenance = MatrixProvenance::rademacher; break;
    case RandomEnsemble::uniform: out.provenance = MatrixProvenance::uniform; break;
  }
  return out;
}

namespace {

template <typename Visit>
void enumerate_supports(const WeightSequence& w, double s, std::size_t limit, Visit&& visit) {
  const std::size_t blocks = w.size();
  std::vector<std::size_t> current;
  std::size_t visited = 0;
  auto recurse = [&](auto&& self, std::size_t next, double budget) -> void {
    if (++visited > limit) {
      throw GuardExceeded("more than " + std::to_string(limit) + " admissible supports");
    }
    visit(current, budget);
    for (std::size_t b = next; b < blocks; ++b) {
      const double grown = budget + w[b] * w[b];
      if (grown > s) continue;
      current.push_back(b);
      self(self, b + 1, grown);
      current.pop_back();
    }
  };
  recurse(recurse, 0, 0.0);
}

}  // namespace

std::vector<BlockSupport> maximal_supports(const WeightSequence& w, double s, std::size_t limit) {
  std::vector<BlockSupport> out;
  std::vector<char> member(w.size(), 0);
  enumerate_supports(w, s, limit, [&](const std::vector<std::size_t>& support, double budget) {
    if (support.empty()) return;
    for (std::size_t b : support) member[b] = 1;
    bool maximal = true;
    for (std::size_t b = 0; b < w.size() && maximal; ++b) {
      if (!member[b] && budget + w[b] * w[b] <= s) maximal = false;
    }
    for (std::size_t b : support) member[b] = 0;
    if (maximal) out.emplace_back(support);
  });
  return out;
}

std::size_t count_admissible_supports(const WeightSequence& w, double s, std::size_t limit) {
  std::size_t count = 0;
  enumerate_supports(w, s, limit, [&](const std::vector<std::size_t>&, double) { ++count; });
  return count;
}

Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& a, const BlockStructure& structure,
                                 const BlockSupport& support) {
  support.check_within(structure.block_count());
  Index width = 0;
  for (std::size_t b : support) width += structure.size(b);
  Eigen::MatrixXd out(a.rows(), width);
  Index col = 0;
  for (std::size_t b : support) {
    out.middleCols(col, structure.size(b)) = a.middleCols(structure.offset(b), structure.size(b));
    col += structure.size(b);
  }
  return out;
}

RipEstimate empirical_wbrip(const SensingMatrix& a, const BlockStructure& structure,
                            const WeightSequence& w, double s, unsigned threads,
                            std::size_t limit) {
  if (structure.total_size() != a.cols()) {
    throw StructuralError("block structure covers " + std::to_string(structure.total_size()) +
                          " columns, matrix has " + std::to_string(a.cols()));
  }
  if (structure.block_count() != w.size()) {
    throw StructuralError("weight count does not match block count");
  }
  const auto supports = maximal_supports(w, s, limit);

  struct Extremes {
    double delta = 0.0;
    double lo = 1.0;
    double hi = 1.0;
    std::size_t worst = 0;
  };
  std::vector<Extremes> per_support(supports.size());
  parallel_for(supports.size(), threads, [&](std::size_t k) {
    const Eigen::MatrixXd sub = restrict_columns(a.entries, structure, supports[k]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    const auto& sv = svd.singularValues();
    // A_S with more columns than rows has a zero singular value that the thin
    // SVD does not report.
    const double smin = sub.cols() > sub.rows() ? 0.0 : sv.minCoeff();
    const double smax = sv.size() ? sv.maxCoeff() : 0.0;
    Extremes e;
    e.lo = smin * smin;
    e.hi = smax * smax;
    e.delta = std::max(e.hi - 1.0, 1.0 - e.lo);
    e.worst = k;
    per_support[k] = e;
  });

  RipEstimate est;
  est.s = s;
  est.supports_checked = supports.size();
  std::size_t worst = supports.size();
  for (std::size_t k = 0; k < per_support.size(); ++k) {
    const auto& e = per_support[k];
    est.min_sq_singular = std::min(est.min_sq_singular, e.lo);
    est.max_sq_singular = std::max(est.max_sq_singular, e.hi);
    if (worst == supports.size() || e.delta > est.delta) {
      est.delta = e.delta;
      worst = k;
    }
  }
  if (worst < supports.size()) est.worst_support = supports[worst];
  est.delta = std::max(est.delta, 0.0);
  return est;
}

std::size_t max_block_count(const BlockStructure& structure) {
  const Index dmin = structure.min_block_size();
  return static_cast<std::size_t>((structure.total_size() + dmin - 1) / dmin);
}

Eigen::MatrixXd kronecker_identity(const Eigen::MatrixXd& a, Index d) {
  if (d < 1) throw DomainError("identity factor size must be >= 1");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() * d, a.cols() * d);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      for (Index k = 0; k < d; ++k) out(i * d + k, j * d + k) = a(i, j);
    }
  }
  return out;
}

TensorRipComparison tensor_rip_equivalence(const SensingMatrix& a, Index d,
                                           const WeightSequence& w, double s, unsigned threads) {
  if (static_cast<std::size_t>(a.cols()) != w.size()) {
    throw StructuralError("one weight per column of A is required");
  }
  TensorRipComparison out;
  const auto scalar_structure = BlockStructure::uniform(w.size(), 1);
  out.delta_scalar = empirical_wbrip(a, scalar_structure, w, s, threads).delta;

  if (a.rows() * d * a.cols() * d <= kKroneckerEntryLimit) {
    SensingMatrix tensor{kronecker_identity(a.entries, d), a.normalized, a.provenance};
    out.delta_block =
        empirical_wbrip(tensor, BlockStructure::uniform(w.size(), d), w, s, threads).delta;
    out.materialized = true;
  } else {
    // (A (x) I_d)_S = A_S (x) I_d has the singular values of A_S, each d times.
    out.delta_block = out.delta_scalar;
    out.materialized = false;
  }
  return out;
}

double coherence_ratio(const Eigen::MatrixXd& a, const BlockVector& u, const BlockVector& v) {
  if (!(u.structure() == v.structure())) throw StructuralError("u and v use different structures");
  if (u.structure().total_size() != a.cols()) throw StructuralError("vector length != columns of A");
  if (u.support().intersects(v.support())) {
    throw DomainError("coherence check requires disjoint block supports");
  }
  const double nu = u.data().norm();
  const double nv = v.data().norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs((a * u.data()).dot(a * v.data())) / (nu * nv);
}

CoherenceCheck disjoint_coherence_check(const SensingMatrix& a, const BlockStructure& structure,
                                        const WeightSequence& w, double s, double t,
                                        std::size_t trials, std::uint64_t seed) {
  CoherenceCheck out;
  out.delta_s_plus_t = empirical_wbrip(a, structure, w, s + t).delta;

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution keep(0.5);
  std::vector<std::size_t> order(structure.block_count());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;

  auto draw = [&](std::vector<char>& used, double budget) {
    BlockVector x(structure);
    double spent = 0.0;
    bool any = false;
    for (std::size_t b : order) {
      if (used[b]) continue;
      const double cost = w[b] * w[b];
      if (spent + cost > budget) continue;
      if (any && !keep(gen)) continue;
      used[b] = 1;
      spent += cost;
      any = true;
      for (Index i = 0; i < x.block(b).size(); ++i) x.block(b)[i] = normal(gen);
    }
    return std::make_pair(std::move(x), any);
  };

  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<char> used(order.size(), 0);
    auto [u, has_u] = draw(used, s);
    auto [v, has_v] = draw(used, t);
    if (!has_u || !has_v) continue;
    out.worst_ratio = std::max(out.worst_ratio, coherence_ratio(a.entries, u, v));
    ++out.pairs;
  }
  return out;
}

}  // namespace wgcs
