#pragma once

// Weighted group basis pursuit denoising
//
//   minimize   sum_b w_b ||Z[B_b, :]||_F
//   subject to ||A Z - Y||_F <= eta
//
// for matrix-valued unknowns whose rows are grouped by a BlockStructure. One
// row block per multi-index with J Hilbert coordinates as columns gives the
// joint-sparse recovery problem; J = 1 gives ordinary (weighted) group BPDN.

#include "wgcs/block_model.hpp"
#include "wgcs/sensing.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace wgcs {

/// Row blocks x J coefficient columns.
using CoefficientMatrix = Eigen::MatrixXd;
/// m measurements x J coordinates.
using SnapshotMatrix = Eigen::MatrixXd;

/// Scales v by max(0, 1 - threshold / ||v||_2).
Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& row, double threshold);

/// sum_b w_b ||Z[B_b, :]||_F
double weighted_group_norm(const CoefficientMatrix& z, const BlockStructure& rows,
                           const WeightSequence& w);

/// ||Z[B_b, :]||_F for every row block.
Eigen::VectorXd row_block_norms(const CoefficientMatrix& z, const BlockStructure& rows);

struct SolveSettings {
  std::size_t max_iterations = 100'000;
  /// Stop when ||AZ - Y|| - eta <= primal_tolerance * (1 + ||Y||).
  double primal_tolerance = 1e-8;
  /// ... and |objective - dual objective| <= dual_tolerance * (1 + objective).
  double dual_tolerance = 1e-8;
  /// Residual balancing of the primal and dual step sizes.
  bool adaptive_steps = true;
  /// Convergence test period in iterations.
  std::size_t check_every = 10;
  bool record_history = false;
};

enum class SolveStatus { converged, not_converged };

std::string to_string(SolveStatus status);

struct SolveResult {
  CoefficientMatrix z;
  /// Dual certificate Lambda (m x J) with A^T Lambda in the subdifferential
  /// of the weighted group norm at z, up to tolerance.
  Eigen::MatrixXd dual;
  SolveStatus status = SolveStatus::not_converged;
  std::size_t iterations = 0;
  double objective = 0.0;
  double dual_objective = 0.0;
  /// |objective - dual_objective| / (1 + objective).
  double gap = 0.0;
  /// max(0, ||AZ - Y|| - eta) / (1 + ||Y||)
  double primal_residual = 0.0;
  /// max(0, max_b ||(A^T Lambda)_b|| / w_b - 1) of the unscaled dual iterate.
  double dual_residual = 0.0;
  /// ||AZ - Y||_F
  double constraint_activity = 0.0;
  /// Distance from Y to the range of A.
  double range_distance = 0.0;
  /// Objective of the best iterate within primal tolerance so far, one entry
  /// per convergence check once such an iterate exists.
  std::vector<double> objective_history;

  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Solves the constrained problem with a primal-dual hybrid gradient method on
/// the range-reduced system. Throws InfeasibleError when eta is smaller than
/// the distance from Y to the range of A.
SolveResult solve_wg_bpdn(const Eigen::MatrixXd& a, const SnapshotMatrix& y,
                          const BlockStructure& rows, const WeightSequence& w, double eta,
                          const SolveSettings& settings = {});

SolveResult solve_wg_bpdn(const SensingMatrix& a, const SnapshotMatrix& y,
                          const BlockStructure& rows, const WeightSequence& w, double eta,
                          const SolveSettings& settings = {});

/// Optimality residuals for a candidate solution. All four entries are
/// dimensionless and should be <= tolerance at an optimum.
struct KktCertificate {
  /// ||Lambda||_F of the dual certificate used.
  double dual_scale = 0.0;
  /// max over zero row blocks of ||(A^T Lambda)_b|| / w_b - 1.
  double inactive_violation = 0.0;
  /// max over nonzero row blocks of ||(A^T Lambda)_b - w_b Z_b / ||Z_b|| || / w_b.
  double active_misalignment = 0.0;
  /// Lambda must be a nonnegative multiple of Y - AZ that vanishes when the
  /// constraint is slack (only meaningful for eta > 0).
  double complementary_slackness = 0.0;
  /// max(0, ||Y - AZ|| - eta) / (1 + ||Y||)
  double infeasibility = 0.0;

  double worst() const;
  bool passes(double tolerance) const { return worst() <= tolerance; }
};

/// Evaluates the certificate with the given dual matrix, or with one built
/// from the data when `dual` is empty: a multiple of the residual when
/// eta > 0, the least-norm solution of A_S^T Lambda = w_S Z_S / ||Z_S|| when
/// eta = 0.
KktCertificate kkt_certificate(const CoefficientMatrix& z, const Eigen::MatrixXd& a,
                               const SnapshotMatrix& y, const BlockStructure& rows,
                               const WeightSequence& w, double eta,
                               const std::optional<Eigen::MatrixXd>& dual = std::nullopt);

/// Constants of the recovery guarantee under the weighted block RIP.
struct RecoveryConstants {
  double c = 0.0;
  double d = 0.0;
  double rho = 0.0;
  double tau = 0.0;
};

/// Largest admissible delta_2s (exclusive): 1 / (2 sqrt(2) + 1).
double recovery_delta_threshold();

/// Throws DomainError unless 0 <= delta_2s < recovery_delta_threshold().
RecoveryConstants recovery_constants(double delta_2s);

struct ErrorBoundReport {
  double sigma_s = 0.0;
  double l21_error = 0.0;
  double l21_bound = 0.0;
  double l2_error = 0.0;
  double l2_bound = 0.0;
  RecoveryConstants constants;
  /// s >= 2 ||w||_inf^2 (needed by the guarantee).
  bool budget_admissible = false;

  double l21_margin() const { return l21_bound - l21_error; }
  double l2_margin() const { return l2_bound - l2_error; }
};

/// Both sides of the l_{2,1} and l_2 recovery bounds for a solver output
/// against a reference, with sigma_s from the brute-force oracle.
ErrorBoundReport error_bound(const CoefficientMatrix& z_hat, const CoefficientMatrix& x_ref,
                             const BlockStructure& rows, const WeightSequence& w, double s,
                             double delta_2s, double eta);

struct NspBoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

/// ||z - x||_{2,1} against (1+rho)/(1-rho)(||z|| - ||x|| + 2 sigma_s(x)) +
/// 2 tau_1/(1-rho) ||A(z - x)|| with the l^1 constants (rho, tau sqrt(s))
/// implied by an l^2 null space property with constants (rho, tau).
NspBoundCheck nsp_bound_check(const CoefficientMatrix& z, const CoefficientMatrix& x,
                              const Eigen::MatrixXd& a, const BlockStructure& rows,
                              const WeightSequence& w, double s, double rho, double tau);

}  // namespace wgcs
