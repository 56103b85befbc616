#include "wgcs/solver.hpp"

#include "wgcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wgcs {

namespace {

void require_rows(const CoefficientMatrix& z, const BlockStructure& rows) {
  if (z.rows() != rows.total_size()) {
    throw StructuralError("coefficient matrix has " + std::to_string(z.rows()) +
                          " rows, structure expects " + std::to_string(rows.total_size()));
  }
}

void require_weights(const BlockStructure& rows, const WeightSequence& w) {
  if (rows.block_count() != w.size()) {
    throw StructuralError("weight count does not match the number of row blocks");
  }
}

// prox of t * sum_b w_b ||Z_b||_F, in place.
void group_shrink(Eigen::MatrixXd& z, const BlockStructure& rows, const WeightSequence& w,
                  double t) {
  for (std::size_t b = 0; b < rows.block_count(); ++b) {
    auto blk = z.middleRows(rows.offset(b), rows.size(b));
    const double norm = blk.norm();
    const double threshold = t * w[b];
    if (norm <= threshold) {
      blk.setZero();
    } else {
      blk *= 1.0 - threshold / norm;
    }
  }
}

// max_b ||M_b||_F / w_b
double max_weighted_ratio(const Eigen::MatrixXd& m, const BlockStructure& rows,
                          const WeightSequence& w) {
  double worst = 0.0;
  for (std::size_t b = 0; b < rows.block_count(); ++b) {
    worst = std::max(worst, m.middleRows(rows.offset(b), rows.size(b)).norm() / w[b]);
  }
  return worst;
}

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// ||A Z - Y||_F <= eta  <=>  ||Q_r^T A Z - Q_r^T Y||_F <= sqrt(eta^2 - ||Y_perp||^2)
// where Q_r spans range(A) and Y_perp is the part of Y outside it.
struct ReducedSystem {
  Eigen::MatrixXd q;  // m x r, empty when no reduction is applied
  Eigen::MatrixXd a;  // r x N
  Eigen::MatrixXd y;  // r x J
  Eigen::MatrixXd y_perp;
  double eta = 0.0;
  double range_distance = 0.0;
  bool reduced = false;
};

ReducedSystem reduce(const Eigen::MatrixXd& a, const Eigen::MatrixXd& y, double eta,
                     double feasibility_slack) {
  ReducedSystem out;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Index rank = qr.rank();
  if (rank < a.rows()) {
    out.q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), rank);
    out.a = out.q.transpose() * a;
    out.y = out.q.transpose() * y;
    out.y_perp = y - out.q * out.y;
    out.range_distance = out.y_perp.norm();
    out.reduced = true;
  } else {
    out.a = a;
    out.y = y;
  }
  if (out.range_distance > eta + feasibility_slack) {
    throw InfeasibleError("noise radius " + std::to_string(eta) +
                          " is smaller than the distance " +
                          std::to_string(out.range_distance) + " from Y to the range of A");
  }
  const double slack = eta * eta - out.range_distance * out.range_distance;
  out.eta = slack > 0.0 ? std::sqrt(slack) : 0.0;
  return out;
}

// Projection onto the Frobenius ball of radius eta around center.
void project_ball(Eigen::MatrixXd& v, const Eigen::MatrixXd& center, double eta) {
  if (eta == 0.0) {
    v = center;
    return;
  }
  const double dist = (v - center).norm();
  if (dist > eta) v = center + (v - center) * (eta / dist);
}

}  // namespace

Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& row, double threshold) {
  if (threshold < 0.0) throw DomainError("soft threshold must be nonnegative");
  const double norm = row.norm();
  if (norm <= threshold) return Eigen::VectorXd::Zero(row.size());
  return row * (1.0 - threshold / norm);
}

Eigen::VectorXd row_block_norms(const CoefficientMatrix& z, const BlockStructure& rows) {
  require_rows(z, rows);
  Eigen::VectorXd out(static_cast<Index>(rows.block_count()));
  for (std::size_t b = 0; b < rows.block_count(); ++b) {
    out[static_cast<Index>(b)] = z.middleRows(rows.offset(b), rows.size(b)).norm();
  }
  return out;
}

double weighted_group_norm(const CoefficientMatrix& z, const BlockStructure& rows,
                           const WeightSequence& w) {
  require_weights(rows, w);
  const Eigen::VectorXd norms = row_block_norms(z, rows);
  double acc = 0.0;
  for (std::size_t b = 0; b < w.size(); ++b) acc += w[b] * norms[static_cast<Index>(b)];
  return acc;
}

std::string to_string(SolveStatus status) {
  return status == SolveStatus::converged ? "converged" : "not_converged";
}

SolveResult solve_wg_bpdn(const SensingMatrix& a, const SnapshotMatrix& y,
                          const BlockStructure& rows, const WeightSequence& w, double eta,
                          const SolveSettings& settings) {
  return solve_wg_bpdn(a.entries, y, rows, w, eta, settings);
}

SolveResult solve_wg_bpdn(const Eigen::MatrixXd& a, const SnapshotMatrix& y,
                          const BlockStructure& rows, const WeightSequence& w, double eta,
                          const SolveSettings& settings) {
  if (a.cols() != rows.total_size()) {
    throw StructuralError("A has " + std::to_string(a.cols()) + " columns, row structure covers " +
                          std::to_string(rows.total_size()));
  }
  if (a.rows() != y.rows()) throw StructuralError("A and Y have different row counts");
  require_weights(rows, w);
  if (!(eta >= 0.0)) throw DomainError("noise radius eta must be >= 0");
  if (!(settings.primal_tolerance > 0.0) || !(settings.dual_tolerance > 0.0)) {
    throw DomainError("solver tolerances must be positive");
  }

  const double y_norm = y.norm();
  const double primal_slack = settings.primal_tolerance * (1.0 + y_norm);
  const ReducedSystem sys = reduce(a, y, eta, primal_slack);

  const Index n = a.cols();
  const Index cols = y.cols();
  SolveResult result;
  result.range_distance = sys.range_distance;

  auto finish = [&](const Eigen::MatrixXd& z, const Eigen::MatrixXd& reduced_dual) {
    result.z = z;
    result.objective = weighted_group_norm(z, rows, w);
    const Eigen::MatrixXd residual = y - a * z;
    result.constraint_activity = residual.norm();
    result.primal_residual = std::max(0.0, result.constraint_activity - eta) / (1.0 + y_norm);
    if (sys.reduced) {
      result.dual = sys.q * reduced_dual;
      const double reduced_residual = (sys.y - sys.a * z).norm();
      if (reduced_residual > 0.0) {
        // Keep the full-space dual parallel to Y - AZ.
        result.dual += sys.y_perp * (reduced_dual.norm() / reduced_residual);
      }
    } else {
      result.dual = reduced_dual;
    }
  };

  // Zero is feasible, hence optimal with objective 0.
  if (sys.y.norm() <= sys.eta || sys.a.rows() == 0) {
    finish(Eigen::MatrixXd::Zero(n, cols), Eigen::MatrixXd::Zero(sys.a.rows(), cols));
    result.status = SolveStatus::converged;
    return result;
  }

  const Eigen::MatrixXd& k = sys.a;
  const Eigen::MatrixXd kt = k.transpose();
  const double lipschitz = spectral_norm(k);
  double weight_norm = 0.0;
  for (double v : w.values()) weight_norm += v * v;
  weight_norm = std::sqrt(weight_norm);
  // Ratio of primal to dual scale; makes the iteration covariant under Y -> cY.
  const double gamma = sys.y.norm() / weight_norm;
  double tau = 0.99 * gamma / lipschitz;
  double sigma = 0.99 / (gamma * lipschitz);
  double alpha = 0.5;
  constexpr double kAlphaDecay = 0.95;
  constexpr double kBalance = 1.5;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, cols);
  Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(k.rows(), cols);
  Eigen::MatrixXd kz = Eigen::MatrixXd::Zero(k.rows(), cols);
  Eigen::MatrixXd kt_dual = Eigen::MatrixXd::Zero(n, cols);
  Eigen::MatrixXd z_next, kz_next, dual_next, kt_dual_next, v;

  double incumbent = std::numeric_limits<double>::infinity();
  const std::size_t check_every = std::max<std::size_t>(1, settings.check_every);

  for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
    z_next = z - tau * kt_dual;
    group_shrink(z_next, rows, w, tau);
    kz_next.noalias() = k * z_next;

    v = dual + sigma * (2.0 * kz_next - kz);
    Eigen::MatrixXd scaled = v / sigma;
    project_ball(scaled, sys.y, sys.eta);
    dual_next = v - sigma * scaled;
    kt_dual_next.noalias() = kt * dual_next;

    if (settings.adaptive_steps && alpha > 1e-8) {
      const double primal_step =
          ((z - z_next) / tau - (kt_dual - kt_dual_next)).norm() * gamma;
      const double dual_step = ((dual - dual_next) / sigma - (kz - kz_next)).norm();
      if (primal_step > kBalance * dual_step) {
        tau /= 1.0 - alpha;
        sigma *= 1.0 - alpha;
        alpha *= kAlphaDecay;
      } else if (primal_step * kBalance < dual_step) {
        tau *= 1.0 - alpha;
        sigma /= 1.0 - alpha;
        alpha *= kAlphaDecay;
      }
    }

    z.swap(z_next);
    kz.swap(kz_next);
    dual.swap(dual_next);
    kt_dual.swap(kt_dual_next);
    result.iterations = it;

    if (it % check_every != 0 && it != settings.max_iterations) continue;

    // Lambda = -dual certifies A^T Lambda in the subdifferential at z.
    const double objective = weighted_group_norm(z, rows, w);
    const double dual_violation = max_weighted_ratio(kt_dual, rows, w);
    const double dual_scale = std::max(1.0, dual_violation);
    const double dual_objective =
        ((-dual).cwiseProduct(sys.y).sum() - sys.eta * dual.norm()) / dual_scale;
    const double reduced_residual = (kz - sys.y).norm();
    const double full_residual = std::sqrt(reduced_residual * reduced_residual +
                                           sys.range_distance * sys.range_distance);
    const double infeasibility = std::max(0.0, full_residual - eta) / (1.0 + y_norm);
    const double gap = std::abs(objective - dual_objective) / (1.0 + std::abs(objective));

    result.gap = gap;
    result.dual_objective = dual_objective;
    result.dual_residual = dual_scale - 1.0;
    if (infeasibility <= settings.primal_tolerance) {
      incumbent = std::min(incumbent, objective);
      if (settings.record_history) result.objective_history.push_back(incumbent);
    }
    if (infeasibility <= settings.primal_tolerance && gap <= settings.dual_tolerance) {
      result.status = SolveStatus::converged;
      break;
    }
  }

  finish(z, -dual);
  return result;
}

double KktCertificate::worst() const {
  return std::max({inactive_violation, active_misalignment, complementary_slackness,
                   infeasibility});
}

KktCertificate kkt_certificate(const CoefficientMatrix& z, const Eigen::MatrixXd& a,
                               const SnapshotMatrix& y, const BlockStructure& rows,
                               const WeightSequence& w, double eta,
                               const std::optional<Eigen::MatrixXd>& dual) {
  require_rows(z, rows);
  require_weights(rows, w);
  if (a.cols() != z.rows() || a.rows() != y.rows() || y.cols() != z.cols()) {
    throw StructuralError("A, Y and Z have inconsistent shapes");
  }

  const Eigen::MatrixXd residual = y - a * z;
  const double residual_norm = residual.norm();
  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < rows.block_count(); ++b) {
    if ((z.middleRows(rows.offset(b), rows.size(b)).array() != 0.0).any()) active.push_back(b);
  }

  // Subgradient targets w_b Z_b / ||Z_b|| on the active blocks.
  auto target = [&](std::size_t b) {
    const auto blk = z.middleRows(rows.offset(b), rows.size(b));
    return Eigen::MatrixXd(blk * (w[b] / blk.norm()));
  };

  Eigen::MatrixXd lambda;
  if (dual) {
    if (dual->rows() != y.rows() || dual->cols() != y.cols()) {
      throw StructuralError("dual certificate must have the shape of Y");
    }
    lambda = *dual;
  } else if (active.empty()) {
    lambda = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  } else if (eta > 0.0 && residual_norm > 0.0) {
    const Eigen::MatrixXd g = a.transpose() * residual;
    double num = 0.0, den = 0.0;
    for (std::size_t b : active) {
      const auto gb = g.middleRows(rows.offset(b), rows.size(b));
      num += gb.cwiseProduct(target(b)).sum();
      den += gb.squaredNorm();
    }
    const double t = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    lambda = t * residual;
  } else {
    Index width = 0;
    for (std::size_t b : active) width += rows.size(b);
    Eigen::MatrixXd a_s(a.rows(), width), g_s(width, y.cols());
    Index col = 0;
    for (std::size_t b : active) {
      a_s.middleCols(col, rows.size(b)) = a.middleCols(rows.offset(b), rows.size(b));
      g_s.middleRows(col, rows.size(b)) = target(b);
      col += rows.size(b);
    }
    Eigen::MatrixXd a_s_t = a_s.transpose();
    lambda = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(a_s_t).solve(g_s);
  }

  KktCertificate cert;
  cert.dual_scale = lambda.norm();
  const Eigen::MatrixXd correlation = a.transpose() * lambda;
  cert.inactive_violation = 0.0;
  cert.active_misalignment = 0.0;
  std::size_t next_active = 0;
  for (std::size_t b = 0; b < rows.block_count(); ++b) {
    const auto cb = correlation.middleRows(rows.offset(b), rows.size(b));
    if (next_active < active.size() && active[next_active] == b) {
      ++next_active;
      cert.active_misalignment =
          std::max(cert.active_misalignment, (cb - target(b)).norm() / w[b]);
    } else {
      cert.inactive_violation = std::max(cert.inactive_violation, cb.norm() / w[b] - 1.0);
    }
  }
  cert.inactive_violation = std::max(0.0, cert.inactive_violation);

  if (eta > 0.0 && cert.dual_scale > 0.0) {
    // Lambda = t R with t >= 0, and t (eta - ||R||) = 0.
    double direction = 1.0;
    if (residual_norm > 0.0) {
      const double t = std::max(0.0, lambda.cwiseProduct(residual).sum() / (residual_norm * residual_norm));
      direction = (lambda - t * residual).norm() / cert.dual_scale;
    }
    const double objective = weighted_group_norm(z, rows, w);
    const double slack = cert.dual_scale * std::max(0.0, eta - residual_norm) / (1.0 + objective);
    cert.complementary_slackness = std::max(direction, slack);
  }
  cert.infeasibility = std::max(0.0, residual_norm - eta) / (1.0 + y.norm());
  return cert;
}

double recovery_delta_threshold() { return 1.0 / (2.0 * std::numbers::sqrt2 + 1.0); }

RecoveryConstants recovery_constants(double delta) {
  if (!(delta >= 0.0)) throw DomainError("delta_2s must be nonnegative");
  if (!(delta < recovery_delta_threshold())) {
    throw DomainError("delta_2s = " + std::to_string(delta) +
                      " violates delta_2s < 1/(2 sqrt(2) + 1) = " +
                      std::to_string(recovery_delta_threshold()));
  }
  constexpr double r2 = std::numbers::sqrt2;
  const double denom = (1.0 - delta) * (1.0 - delta * (2.0 * r2 + 1.0));
  const double lead = 1.0 + delta * (2.0 * r2 - 3.0);
  RecoveryConstants out;
  out.c = 2.0 * lead * lead / denom;
  out.d = 2.0 * (3.0 + delta * (2.0 * r2 - 3.0)) * std::sqrt(1.0 + delta) / denom;
  out.rho = 2.0 * r2 * delta / (1.0 - delta);
  out.tau = std::sqrt(1.0 + delta) / (1.0 - delta);
  return out;
}

ErrorBoundReport error_bound(const CoefficientMatrix& z_hat, const CoefficientMatrix& x_ref,
                             const BlockStructure& rows, const WeightSequence& w, double s,
                             double delta_2s, double eta) {
  require_rows(z_hat, rows);
  require_rows(x_ref, rows);
  require_weights(rows, w);
  if (z_hat.cols() != x_ref.cols()) throw StructuralError("Z_hat and X_ref differ in columns");

  ErrorBoundReport out;
  out.constants = recovery_constants(delta_2s);
  out.budget_admissible = s >= 2.0 * w.max() * w.max();
  out.sigma_s = best_approximation_bruteforce_from_norms(row_block_norms(x_ref, rows), w, s, 1.0);
  const Eigen::MatrixXd diff = x_ref - z_hat;
  out.l21_error = weighted_group_norm(diff, rows, w);
  out.l2_error = diff.norm();
  const double root_s = std::sqrt(s);
  out.l21_bound = out.constants.c * out.sigma_s + out.constants.d * root_s * eta;
  out.l2_bound = out.constants.c * out.sigma_s / root_s + out.constants.d * eta;
  return out;
}

NspBoundCheck nsp_bound_check(const CoefficientMatrix& z, const CoefficientMatrix& x,
                              const Eigen::MatrixXd& a, const BlockStructure& rows,
                              const WeightSequence& w, double s, double rho, double tau) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("null space constant rho must lie in [0, 1)");
  require_rows(z, rows);
  require_rows(x, rows);
  const double sigma = best_approximation_bruteforce_from_norms(row_block_norms(x, rows), w, s, 1.0);
  const double tau_l1 = tau * std::sqrt(s);
  NspBoundCheck out;
  out.lhs = weighted_group_norm(z - x, rows, w);
  out.rhs = (1.0 + rho) / (1.0 - rho) *
                (weighted_group_norm(z, rows, w) - weighted_group_norm(x, rows, w) + 2.0 * sigma) +
            2.0 * tau_l1 / (1.0 - rho) * (a * (x - z)).norm();
  return out;
}

}  // namespace wgcs
