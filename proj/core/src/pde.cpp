#include "wgcs/pde.hpp"

#include "wgcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace wgcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

AmplitudeRule AmplitudeRule::algebraic(double c, double r) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("amplitude scale must be finite and >= 0");
  if (!(r > 0.0)) throw DomainError("algebraic decay exponent must be > 0");
  return AmplitudeRule(Kind::algebraic, c, r);
}

AmplitudeRule AmplitudeRule::geometric(double c, double rho) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("amplitude scale must be finite and >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("geometric ratio must lie in (0, 1)");
  return AmplitudeRule(Kind::geometric, c, rho);
}

AmplitudeRule AmplitudeRule::truncated_after(std::uint32_t last) const {
  AmplitudeRule out = *this;
  out.cutoff_ = last;
  return out;
}

double AmplitudeRule::amplitude(std::uint32_t j) const {
  if (j == 0) throw DomainError("fluctuation index starts at 1");
  if (cutoff_ != 0 && j > cutoff_) return 0.0;
  const double jd = static_cast<double>(j);
  return kind_ == Kind::algebraic ? scale_ * std::pow(jd, -rate_) : scale_ * std::pow(rate_, jd);
}

double AmplitudeRule::weighted_tail(std::uint32_t J, double K, double a, double k) const {
  if (!(K >= 0.0) || !(a >= 0.0) || !(k > 0.0)) throw DomainError("invalid tail parameters");
  if (K == 0.0 || scale_ == 0.0) return 0.0;
  if (!std::isfinite(K)) return kInf;
  auto term = [&](double j) { return K * std::pow(j, a) * std::pow(amplitude(static_cast<std::uint32_t>(j)), k); };

  if (cutoff_ != 0) {
    double acc = 0.0;
    for (std::uint32_t j = J + 1; j <= cutoff_; ++j) acc += term(j);
    return acc;
  }

  if (kind_ == Kind::algebraic) {
    // t_j = K c^k j^{-e}; sum_{j > J} j^{-e} <= int_J^inf x^{-e} dx for J >= 1.
    const double e = rate_ * k - a;
    if (e <= 1.0) return kInf;
    double acc = 0.0;
    double start = static_cast<double>(J);
    if (J == 0) {
      acc += term(1.0);
      start = 1.0;
    }
    return acc + K * std::pow(scale_, k) * std::pow(start, 1.0 - e) / (e - 1.0);
  }

  // t_{j+1} / t_j = (1 + 1/j)^a q decreases in j; once below 1 the remainder
  // is dominated by a geometric series.
  const double q = std::pow(rate_, k);
  double acc = 0.0;
  double j = static_cast<double>(J) + 1.0;
  for (int guard = 0; guard < 10'000'000; ++guard, j += 1.0) {
    const double ratio = std::pow(1.0 + 1.0 / j, a) * q;
    if (ratio < 1.0) return acc + term(j) / (1.0 - ratio);
    acc += term(j);
  }
  return kInf;
}

std::string AmplitudeRule::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind_ == Kind::algebraic) {
    os << "algebraic(c=" << scale_ << ", r=" << rate_ << ")";
  } else {
    os << "geometric(c=" << scale_ << ", rho=" << rate_ << ")";
  }
  if (cutoff_ != 0) os << " up to j=" << cutoff_;
  return os.str();
}

AffineDiffusion::AffineDiffusion(std::vector<double> mean_levels, AmplitudeRule amplitudes,
                                 std::uint32_t j_max)
    : mean_levels_(std::move(mean_levels)), amplitudes_(amplitudes), j_max_(j_max) {
  if (mean_levels_.empty()) throw StructuralError("mean field needs at least one level");
  for (double level : mean_levels_) {
    if (!(level > 0.0) || !std::isfinite(level)) {
      throw DomainError("mean field must be positive and finite");
    }
  }
  if (j_max_ < 1) throw DomainError("J_max must be >= 1");
}

AffineDiffusion AffineDiffusion::constant_mean(double mean, AmplitudeRule amplitudes,
                                               std::uint32_t j_max) {
  return AffineDiffusion(std::vector<double>{mean}, amplitudes, j_max);
}

double AffineDiffusion::mean_at(double x) const {
  const auto pieces = mean_levels_.size();
  auto k = static_cast<std::size_t>(std::max(0.0, x) * static_cast<double>(pieces));
  return mean_levels_[std::min(k, pieces - 1)];
}

double AffineDiffusion::min_mean() const {
  return *std::min_element(mean_levels_.begin(), mean_levels_.end());
}

double AffineDiffusion::psi(std::uint32_t j, double x) const {
  return amplitudes_.amplitude(j) * std::sin(static_cast<double>(j) * std::numbers::pi * x);
}

double AffineDiffusion::coefficient(double x, std::span<const double> y) const {
  if (y.size() > j_max_) {
    throw DomainError("parameter dimension " + std::to_string(y.size()) + " exceeds J_max " +
                      std::to_string(j_max_));
  }
  double a = mean_at(x);
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] != 0.0) a += y[j] * psi(static_cast<std::uint32_t>(j + 1), x);
  }
  return a;
}

FemMesh::FemMesh(std::size_t interior_nodes) : n_(interior_nodes) {
  if (n_ < 1) throw DomainError("mesh needs at least one interior node");
}

Eigen::VectorXd assemble_load(const FemMesh& mesh, const LoadFunction& f) {
  const std::size_t n = mesh.n();
  const double h = mesh.h();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Index>(n));
  // Element e spans [e h, (e+1) h], e = 0..n; interior node i sits at (i+1) h.
  for (std::size_t e = 0; e <= n; ++e) {
    const double left = static_cast<double>(e) * h;
    const double right = left + h;
    const double fm = f(0.5 * (left + right));
    if (e >= 1) load[static_cast<Index>(e - 1)] += h / 6.0 * (f(left) + 2.0 * fm);
    if (e < n) load[static_cast<Index>(e)] += h / 6.0 * (f(right) + 2.0 * fm);
  }
  return load;
}

Snapshot solve_snapshot(const AffineDiffusion& op, std::span<const double> y,
                        const FemMesh& mesh, const LoadFunction& f) {
  return solve_snapshot(op, y, mesh, assemble_load(mesh, f));
}

Snapshot solve_snapshot(const AffineDiffusion& op, std::span<const double> y,
                        const FemMesh& mesh, const Eigen::VectorXd& load) {
  const std::size_t n = mesh.n();
  if (load.size() != static_cast<Index>(n)) throw StructuralError("load vector length != mesh size");
  for (double v : y) {
    if (!(std::abs(v) <= 1.0)) throw DomainError("parameters must lie in [-1, 1]");
  }
  const double h = mesh.h();

  std::vector<double> a(n + 1);
  for (std::size_t e = 0; e <= n; ++e) {
    const double mid = (static_cast<double>(e) + 0.5) * h;
    a[e] = op.coefficient(mid, y);
    if (!(a[e] > 0.0)) {
      throw EllipticityError("diffusion coefficient " + std::to_string(a[e]) + " at x = " +
                             std::to_string(mid));
    }
  }

  // Thomas algorithm on K_ii = (a_{i} + a_{i+1}) / h, K_{i,i+1} = -a_{i+1} / h.
  std::vector<double> diag(n), upper(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = (a[i] + a[i + 1]) / h;
    upper[i] = -a[i + 1] / h;
    rhs[i] = load[static_cast<Index>(i)];
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double factor = upper[i - 1] / diag[i - 1];
    diag[i] -= factor * upper[i - 1];
    rhs[i] -= factor * rhs[i - 1];
  }
  Snapshot out;
  out.y.assign(y.begin(), y.end());
  out.coefficients.resize(static_cast<Index>(n));
  out.coefficients[static_cast<Index>(n - 1)] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    out.coefficients[static_cast<Index>(i)] =
        (rhs[i] - upper[i] * out.coefficients[static_cast<Index>(i + 1)]) / diag[i];
  }
  out.transformed = HilbertTransform(mesh).forward(out.coefficients);
  return out;
}

double b0j_bound(const AffineDiffusion& op, std::uint32_t j) {
  if (j < 1 || j > op.j_max()) throw DomainError("b_{0,j} requested outside 1..J_max");
  return op.amplitudes().amplitude(j) / op.min_mean();
}

WueaReport check_wuea(const AffineDiffusion& op, const WeightRule& v, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("summability exponent p must lie in (0, 1)");
  WueaReport out;
  const double kappa_power = (2.0 - p) / p;
  const double lp_power = 2.0 - p;
  const double inv_mean = 1.0 / op.min_mean();
  const auto& amp = op.amplitudes();

  for (std::uint32_t j = 1; j <= op.j_max(); ++j) {
    const double b = b0j_bound(op, j);
    if (b == 0.0) continue;
    const double vj = v.value(j);
    out.kappa += std::pow(vj, kappa_power) * b;
    out.lp_sum += std::pow(vj, lp_power) * std::pow(b, p);
  }

  // Tail: v_j^e b_{0,j}^k = (K_v j^{a_v})^e (amp_j / min abar)^k.
  const std::uint32_t J = op.j_max();
  double kv = 0.0, av = 0.0;
  // Constant rules with a dimension cutoff and explicit lists are infinite
  // beyond their last dimension.
  const bool finite_weights =
      v.kind() == WeightRule::Kind::polynomial ||
      (v.kind() == WeightRule::Kind::constant && v.dimensions() == 0);
  if (v.kind() == WeightRule::Kind::polynomial) {
    kv = v.c();
    av = v.alpha();
  } else if (finite_weights) {
    kv = v.beta();
  }
  const bool tail_vanishes = amp.weighted_tail(J, 1.0, 0.0, 1.0) == 0.0;
  if (tail_vanishes) {
    out.kappa_tail = 0.0;
    out.lp_tail = 0.0;
  } else if (!finite_weights) {
    out.kappa_tail = kInf;
    out.lp_tail = kInf;
  } else {
    out.kappa_tail = amp.weighted_tail(J, std::pow(kv, kappa_power) * inv_mean, av * kappa_power, 1.0);
    out.lp_tail = amp.weighted_tail(J, std::pow(kv, lp_power) * std::pow(inv_mean, p), av * lp_power, p);
  }
  out.kappa += out.kappa_tail;
  out.lp_sum += out.lp_tail;

  std::ostringstream diag;
  diag.precision(6);
  if (!std::isfinite(out.kappa)) {
    diag << "weighted energy series diverges beyond J_max = " << J;
  } else if (!std::isfinite(out.lp_sum)) {
    diag << "weighted summability series diverges beyond J_max = " << J;
  } else if (out.kappa >= 1.0) {
    diag << "kappa = " << out.kappa << " >= 1";
  } else {
    diag << "kappa = " << out.kappa << " < 1";
  }
  out.pass = std::isfinite(out.kappa) && std::isfinite(out.lp_sum) && out.kappa < 1.0;
  out.diagnostic = diag.str();
  return out;
}

double truncation_tail(const AffineDiffusion& op, std::uint32_t tau) {
  const std::uint32_t J = op.j_max();
  double acc = 0.0;
  for (std::uint32_t j = J; j > tau; --j) acc += b0j_bound(op, j);
  const double beyond = op.amplitudes().weighted_tail(std::max(J, tau), 1.0 / op.min_mean(), 0.0, 1.0);
  return acc + beyond;
}

std::uint32_t choose_truncation(const AffineDiffusion& op, double eps, double mu) {
  if (!(eps > 0.0) || !(mu > 0.0)) throw DomainError("truncation needs eps > 0 and mu > 0");
  const double target = eps * mu * (1.0 + 1e-12);
  double tail = kInf;
  for (std::uint32_t tau = 1; tau <= op.j_max(); ++tau) {
    tail = truncation_tail(op, tau);
    if (tail <= target) return tau;
  }
  std::ostringstream os;
  os.precision(6);
  os << "no truncation tau <= J_max = " << op.j_max() << " reaches eps*mu = " << eps * mu
     << "; tail at J_max is " << tail;
  throw DomainError(os.str());
}

HilbertTransform::HilbertTransform(const FemMesh& mesh) : h_(mesh.h()) {
  const auto n = static_cast<Index>(mesh.n());
  diag_.resize(n);
  sub_.resize(n > 0 ? n - 1 : 0);
  const double d = 2.0 / h_;
  const double off = -1.0 / h_;
  diag_[0] = std::sqrt(d);
  for (Index i = 1; i < n; ++i) {
    sub_[i - 1] = off / diag_[i - 1];
    diag_[i] = std::sqrt(d - sub_[i - 1] * sub_[i - 1]);
  }
}

Eigen::VectorXd HilbertTransform::forward(const Eigen::VectorXd& c) const {
  const Index n = diag_.size();
  if (c.size() != n) throw StructuralError("coefficient vector length != mesh size");
  Eigen::VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = diag_[i] * c[i] + (i + 1 < n ? sub_[i] * c[i + 1] : 0.0);
  }
  return out;
}

Eigen::VectorXd HilbertTransform::inverse(const Eigen::VectorXd& w) const {
  const Index n = diag_.size();
  if (w.size() != n) throw StructuralError("coordinate vector length != mesh size");
  Eigen::VectorXd c(n);
  c[n - 1] = w[n - 1] / diag_[n - 1];
  for (Index i = n - 1; i-- > 0;) c[i] = (w[i] - sub_[i] * c[i + 1]) / diag_[i];
  return c;
}

Eigen::MatrixXd HilbertTransform::forward(const Eigen::MatrixXd& c) const {
  Eigen::MatrixXd out(c.rows(), c.cols());
  for (Index k = 0; k < c.cols(); ++k) out.col(k) = forward(Eigen::VectorXd(c.col(k)));
  return out;
}

Eigen::MatrixXd HilbertTransform::inverse(const Eigen::MatrixXd& w) const {
  Eigen::MatrixXd out(w.rows(), w.cols());
  for (Index k = 0; k < w.cols(); ++k) out.col(k) = inverse(Eigen::VectorXd(w.col(k)));
  return out;
}

double HilbertTransform::energy_norm(const Eigen::VectorXd& c) const { return forward(c).norm(); }

double HilbertTransform::dual_norm(const Eigen::VectorXd& load) const {
  // F^T G^{-1} F = ||L^{-1} F||^2; forward substitution with L.
  const Index n = diag_.size();
  if (load.size() != n) throw StructuralError("load vector length != mesh size");
  Eigen::VectorXd z(n);
  z[0] = load[0] / diag_[0];
  for (Index i = 1; i < n; ++i) z[i] = (load[i] - sub_[i - 1] * z[i - 1]) / diag_[i];
  return z.norm();
}

Eigen::MatrixXd HilbertTransform::gram() const {
  const Index n = diag_.size();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    g(i, i) = 2.0 / h_;
    if (i + 1 < n) g(i, i + 1) = g(i + 1, i) = -1.0 / h_;
  }
  return g;
}

double a_priori_bound(const AffineDiffusion& op, const HilbertTransform& hilbert,
                      const Eigen::VectorXd& load, double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw DomainError("a priori bound needs 0 <= kappa < 1");
  return hilbert.dual_norm(load) / (op.min_mean() * (1.0 - kappa));
}

}  // namespace wgcs
