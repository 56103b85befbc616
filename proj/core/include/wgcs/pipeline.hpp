#pragma once

// End-to-end recovery of the parametric diffusion solution from random
// snapshots: truncation, index set, sampling, snapshots, weighted joint-sparse
// recovery, held-out error evaluation and a JSON report.

#include "wgcs/multiindex.hpp"
#include "wgcs/pde.hpp"
#include "wgcs/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wgcs {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kReportSchema = "wgcs.recovery-report";

/// Keys of the "operator" object: mean_field (number or list of levels),
/// amplitude, decay, j_max and optionally kind ("algebraic" or "geometric";
/// for geometric, decay is the ratio rho).
struct OperatorConfig {
  std::vector<double> mean_field{1.0};
  double amplitude = 0.1;
  double decay = 3.0;
  std::string kind = "algebraic";
  std::uint32_t j_max = 64;

  AffineDiffusion build() const;
};

struct WeightConfig {
  /// "polynomial" (c, alpha) or "constant" (beta = c, dimensions).
  std::string kind = "polynomial";
  double c = 1.2;
  double alpha = 0.5;
  std::uint32_t dimensions = 0;

  WeightRule build() const;
};

struct ExperimentConfig {
  OperatorConfig op;
  WeightConfig weights;
  double p = 0.8;
  double s = 16.0;
  double c0 = 1.0;
  std::uint64_t seed = 1;
  std::size_t mesh_nodes = 255;
  double epsilon = 1e-3;
  std::size_t test_size = 200;
  /// Constant load f.
  double load = 1.0;
  /// 0 selects the truncation from epsilon.
  std::uint32_t tau = 0;
  std::size_t max_iterations = 100'000;
  double tolerance = 1e-8;

  /// Parses a JSON document; unknown keys are rejected.
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  /// Throws DomainError on out-of-range values.
  void validate() const;
};

/// Named, independent seed streams derived from the experiment seed.
struct SeedStreams {
  std::uint64_t master = 0;
  std::uint64_t sampling = 0;
  std::uint64_t testing = 0;

  static SeedStreams derive(std::uint64_t seed);
};

/// ceil(c0 s log^3(s) log(max(N, 2))), at least 1.
std::size_t sample_count(double c0, double s, std::size_t n);

/// u(y) = sum_nu T_nu(y) Z[nu, :].
Eigen::VectorXd evaluate_expansion(const IndexSet& lambda, const CoefficientMatrix& z,
                                   std::span<const double> y);

struct ErrorEstimate {
  /// max_i ||u~(y_i) - u(y_i)||
  double linf = 0.0;
  /// sqrt(mean_i ||u~(y_i) - u(y_i)||^2)
  double l2 = 0.0;
  /// max_i ||u(y_i)|| and sqrt(mean_i ||u(y_i)||^2) of the reference.
  double reference_linf = 0.0;
  double reference_l2 = 0.0;
  std::size_t samples = 0;

  double linf_relative() const { return reference_linf > 0.0 ? linf / reference_linf : linf; }
  double l2_relative() const { return reference_l2 > 0.0 ? l2 / reference_l2 : l2; }
};

using ReferenceSolution = std::function<Eigen::VectorXd(std::span<const double>)>;

/// Compares the expansion with `reference` at `test_size` fresh draws from
/// the arcsine measure on [-1, 1]^dims.
ErrorEstimate evaluate_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                              const ReferenceSolution& reference, std::uint32_t dims,
                              std::uint64_t seed, std::size_t test_size, unsigned threads = 1);

/// Reference = direct FEM solve with all J_max fluctuations, in orthonormal
/// H^1_0 coordinates.
ErrorEstimate evaluate_pde_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                                  const AffineDiffusion& op, const FemMesh& mesh,
                                  const Eigen::VectorXd& load, std::uint64_t seed,
                                  std::size_t test_size, unsigned threads = 1);

struct ExpansionErrorEstimate {
  ErrorEstimate monte_carlo;
  /// ||Z - Z_ref||_F
  double coefficient_frobenius = 0.0;
  /// sum_nu omega_nu ||Z_nu - Z_ref,nu||
  double coefficient_weighted_l21 = 0.0;
};

/// Reference = a second expansion on the same index set.
ExpansionErrorEstimate evaluate_expansion_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                                                 const CoefficientMatrix& z_ref,
                                                 const std::vector<double>& omega,
                                                 std::uint64_t seed, std::size_t test_size,
                                                 unsigned threads = 1);

struct RecoveryReport {
  ExperimentConfig config;
  SeedStreams seeds;
  unsigned threads = 1;
  WueaReport wuea;
  std::uint32_t tau = 0;
  double truncation_tail = 0.0;
  IndexSet lambda;
  std::vector<double> omega;
  std::size_t m = 0;
  Eigen::MatrixXd samples;
  /// m x n snapshot coordinates (unnormalized).
  Eigen::MatrixXd snapshots;
  SolveResult solve;
  ErrorEstimate errors;
  /// Solve did not converge; results are reported but not certified.
  bool degraded = false;
  std::string json;
};

/// Runs every stage; errors are rethrown as StageError tagged with the stage
/// name. Snapshot generation and testing use `threads` workers.
RecoveryReport run_experiment(const ExperimentConfig& config, unsigned threads = 1);

/// JSON document with iterations, gap, residuals and constraint_activity.
std::string solve_diagnostics_json(const SolveResult& result);

struct ReportDiff {
  bool identical = true;
  /// JSON pointers of differing entries.
  std::vector<std::string> differences;
};

/// Structural comparison of two report documents ignoring "timings".
ReportDiff report_diff(const std::string& left_json, const std::string& right_json);

}  // namespace wgcs
