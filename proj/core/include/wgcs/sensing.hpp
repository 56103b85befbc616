#pragma once

// Sampling matrices and exhaustive (desk-scale) restricted isometry checks for
// weighted block sparsity.

#include "wgcs/block_model.hpp"
#include "wgcs/multiindex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace wgcs {

enum class MatrixProvenance { orthonormal_system, gaussian, rademacher, uniform, external };

std::string to_string(MatrixProvenance provenance);

struct SensingMatrix {
  Eigen::MatrixXd entries;
  /// True when the 1/sqrt(m) factor has been applied.
  bool normalized = false;
  MatrixProvenance provenance = MatrixProvenance::external;

  Index rows() const noexcept { return entries.rows(); }
  Index cols() const noexcept { return entries.cols(); }
};

/// A_{i,nu} = T_nu(y^{(i)}), optionally divided by sqrt(m). Samples are rows of
/// `samples`; columns follow the member order of `lambda`.
SensingMatrix build_sampling_matrix(const IndexSet& lambda, const Eigen::MatrixXd& samples,
                                    bool normalize);

enum class RandomEnsemble { gaussian, rademacher, uniform };

/// i.i.d. unit-variance entries divided by sqrt(m).
SensingMatrix random_matrix(RandomEnsemble kind, Index m, Index n, std::uint64_t seed);

/// Default ceiling on the number of supports an exhaustive check may visit.
inline constexpr std::size_t kSupportEnumerationLimit = 1'000'000;

/// All nonempty block supports S with w(S) <= s that cannot be enlarged
/// without leaving the budget. Restricted isometry constants over all
/// admissible supports are attained on these (singular value interlacing).
std::vector<BlockSupport> maximal_supports(const WeightSequence& w, double s,
                                           std::size_t limit = kSupportEnumerationLimit);

/// Number of supports with w(S) <= s, including the empty one.
std::size_t count_admissible_supports(const WeightSequence& w, double s,
                                      std::size_t limit = kSupportEnumerationLimit);

struct RipEstimate {
  double delta = 0.0;
  double s = 0.0;
  std::size_t supports_checked = 0;
  BlockSupport worst_support;
  /// Extreme squared singular values over the checked supports.
  double min_sq_singular = 1.0;
  double max_sq_singular = 1.0;
};

/// Columns of A belonging to the blocks in `support`, blocks expanded.
Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& a, const BlockStructure& structure,
                                 const BlockSupport& support);

/// Exact weighted block RIP constant of A at budget s from the extreme
/// singular values of every maximal restriction A_S.
RipEstimate empirical_wbrip(const SensingMatrix& a, const BlockStructure& structure,
                            const WeightSequence& w, double s, unsigned threads = 1,
                            std::size_t limit = kSupportEnumerationLimit);

/// kappa: the largest number of blocks of the smallest size, ceil(N / d_min).
std::size_t max_block_count(const BlockStructure& structure);

/// A (x) I_d with the induced block structure (one block of width d per column
/// of A).
Eigen::MatrixXd kronecker_identity(const Eigen::MatrixXd& a, Index d);

struct TensorRipComparison {
  double delta_scalar = 0.0;
  double delta_block = 0.0;
  /// Whether A (x) I_d was formed explicitly.
  bool materialized = false;
};

/// Entry budget above which A (x) I_d is not formed explicitly.
inline constexpr Index kKroneckerEntryLimit = 1'000'000;

/// delta of A for weighted scalar supports versus delta of A (x) I_d for the
/// matching joint-sparse blocks of width d.
TensorRipComparison tensor_rip_equivalence(const SensingMatrix& a, Index d,
                                           const WeightSequence& w, double s,
                                           unsigned threads = 1);

/// |<Au, Av>| / (||u|| ||v||). Throws DomainError if the block supports of u
/// and v intersect.
double coherence_ratio(const Eigen::MatrixXd& a, const BlockVector& u, const BlockVector& v);

struct CoherenceCheck {
  double worst_ratio = 0.0;
  double delta_s_plus_t = 0.0;
  std::size_t pairs = 0;
};

/// Random disjoint pairs (u, v) with weighted sparsities at most s and t;
/// reports the worst coherence ratio and the exhaustive delta_{s+t}.
CoherenceCheck disjoint_coherence_check(const SensingMatrix& a, const BlockStructure& structure,
                                        const WeightSequence& w, double s, double t,
                                        std::size_t trials, std::uint64_t seed);

}  // namespace wgcs
