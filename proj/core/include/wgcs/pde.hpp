#pragma once

// Affine-parametric diffusion on (0, 1) with homogeneous Dirichlet conditions:
//
//   -(a(x; y) u')' = f,   a(x; y) = abar(x) + sum_j y_j psi_j(x),
//   psi_j(x) = amplitude_j sin(j pi x),
//
// discretized with P1 elements on a uniform mesh.

#include "wgcs/block_model.hpp"
#include "wgcs/multiindex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wgcs {

/// Amplitudes of the fluctuations psi_j.
class AmplitudeRule {
 public:
  enum class Kind { algebraic, geometric };

  /// amplitude_j = c j^{-r}
  static AmplitudeRule algebraic(double c, double r);
  /// amplitude_j = c rho^j, 0 < rho < 1
  static AmplitudeRule geometric(double c, double rho);
  static AmplitudeRule zero() { return algebraic(0.0, 1.0); }

  /// Copy whose amplitudes vanish for j > last (0 keeps the infinite family).
  AmplitudeRule truncated_after(std::uint32_t last) const;

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  double rate() const noexcept { return rate_; }
  std::uint32_t cutoff() const noexcept { return cutoff_; }

  double amplitude(std::uint32_t j) const;

  /// Upper bound on sum_{j > J} K j^a amplitude_j^k for K >= 0, a >= 0, k > 0.
  /// Returns +infinity when the series diverges.
  double weighted_tail(std::uint32_t J, double K, double a, double k) const;

  std::string describe() const;

 private:
  AmplitudeRule(Kind kind, double scale, double rate) : kind_(kind), scale_(scale), rate_(rate) {}

  Kind kind_;
  double scale_;
  double rate_;
  std::uint32_t cutoff_ = 0;
};

class AffineDiffusion {
 public:
  /// abar is piecewise constant with `mean_levels` on equal subintervals of
  /// (0, 1); fluctuations j = 1..j_max are represented explicitly, the rest
  /// only through analytic tails.
  AffineDiffusion(std::vector<double> mean_levels, AmplitudeRule amplitudes, std::uint32_t j_max);

  static AffineDiffusion constant_mean(double mean, AmplitudeRule amplitudes,
                                       std::uint32_t j_max);

  const std::vector<double>& mean_levels() const noexcept { return mean_levels_; }
  const AmplitudeRule& amplitudes() const noexcept { return amplitudes_; }
  std::uint32_t j_max() const noexcept { return j_max_; }

  double mean_at(double x) const;
  /// ess-inf of abar.
  double min_mean() const;
  double psi(std::uint32_t j, double x) const;
  /// a(x; y_1..y_tau, 0, 0, ...) with tau = y.size().
  double coefficient(double x, std::span<const double> y) const;

 private:
  std::vector<double> mean_levels_;
  AmplitudeRule amplitudes_;
  std::uint32_t j_max_;
};

/// Uniform mesh of (0, 1) with n interior nodes x_i = i h, h = 1/(n+1).
class FemMesh {
 public:
  explicit FemMesh(std::size_t interior_nodes);
  std::size_t n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / static_cast<double>(n_ + 1); }
  double node(std::size_t i) const { return static_cast<double>(i + 1) * h(); }

 private:
  std::size_t n_;
};

using LoadFunction = std::function<double(double)>;

struct Snapshot {
  std::vector<double> y;
  /// Nodal values at the interior nodes.
  Eigen::VectorXd coefficients;
  /// Coordinates in an orthonormal basis of the discrete H^1_0 space.
  Eigen::VectorXd transformed;
};

/// Load vector int f phi_i with Simpson's rule per element.
Eigen::VectorXd assemble_load(const FemMesh& mesh, const LoadFunction& f);

/// Solves the truncated problem with coefficient a(.; y_1..y_tau, 0, ...),
/// tau = y.size(), using midpoint quadrature per element. Throws
/// EllipticityError if the coefficient is not positive at some midpoint.
Snapshot solve_snapshot(const AffineDiffusion& op, std::span<const double> y,
                        const FemMesh& mesh, const Eigen::VectorXd& load);
Snapshot solve_snapshot(const AffineDiffusion& op, std::span<const double> y,
                        const FemMesh& mesh, const LoadFunction& f);

/// ||psi_j / abar||_inf bound on ||A_0^{-1} A_j||: amplitude_j / ess-inf abar.
double b0j_bound(const AffineDiffusion& op, std::uint32_t j);

struct WueaReport {
  /// sum_j v_j^{(2-p)/p} b_{0,j}, finite part plus tail bound.
  double kappa = 0.0;
  /// sum_j v_j^{2-p} b_{0,j}^p, finite part plus tail bound.
  double lp_sum = 0.0;
  double kappa_tail = 0.0;
  double lp_tail = 0.0;
  bool pass = false;
  std::string diagnostic;
};

/// Weighted uniform ellipticity: kappa < 1 and a finite lp_sum.
WueaReport check_wuea(const AffineDiffusion& op, const WeightRule& v, double p);

/// sum_{j > tau} b_{0,j}, explicit up to j_max and analytic beyond.
double truncation_tail(const AffineDiffusion& op, std::uint32_t tau);

/// Smallest tau >= 1 with truncation_tail(tau) <= eps * mu. Throws
/// DomainError if no tau <= j_max reaches the target.
std::uint32_t choose_truncation(const AffineDiffusion& op, double eps, double mu);

/// H^1_0 Gram matrix of the hat functions, G = tridiag(-1/h, 2/h, -1/h), and
/// its bidiagonal Cholesky factor G = L L^T.
class HilbertTransform {
 public:
  explicit HilbertTransform(const FemMesh& mesh);

  std::size_t size() const noexcept { return static_cast<std::size_t>(diag_.size()); }
  /// L^T c: Euclidean norm equals the H^1_0 norm of sum c_i phi_i.
  Eigen::VectorXd forward(const Eigen::VectorXd& c) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& w) const;
  /// Column-wise forward/inverse for n x J matrices.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& c) const;
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& w) const;

  /// sqrt(c^T G c)
  double energy_norm(const Eigen::VectorXd& c) const;
  /// sqrt(F^T G^{-1} F), the discrete H^{-1} norm of a load vector.
  double dual_norm(const Eigen::VectorXd& load) const;

  Eigen::MatrixXd gram() const;
  /// Diagonal and subdiagonal of L.
  const Eigen::VectorXd& diagonal() const noexcept { return diag_; }
  const Eigen::VectorXd& subdiagonal() const noexcept { return sub_; }

 private:
  double h_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd sub_;
};

/// sup_y ||u_h(y)||_{H^1_0} <= ||F||_{G^{-1}} / (ess-inf abar (1 - kappa)).
double a_priori_bound(const AffineDiffusion& op, const HilbertTransform& hilbert,
                      const Eigen::VectorXd& load, double kappa);

}  // namespace wgcs
