#include "wgcs/multiindex.hpp"

#include "wgcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace wgcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Hard ceiling on |Lambda| so a mistyped budget cannot exhaust memory.
constexpr std::size_t kMaxIndexSetSize = 10'000'000;

}  // namespace

MultiIndex::MultiIndex(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  for (const auto& [dim, deg] : entries) {
    if (dim == 0) throw StructuralError("multi-index dimensions are numbered from 1");
    if (deg == 0) continue;
    if (!entries_.empty() && entries_.back().first == dim) {
      throw StructuralError("multi-index lists dimension " + std::to_string(dim) + " twice");
    }
    entries_.emplace_back(dim, deg);
  }
}

MultiIndex MultiIndex::from_dense(std::span<const std::uint32_t> degrees) {
  std::vector<Entry> entries;
  for (std::size_t j = 0; j < degrees.size(); ++j) {
    if (degrees[j] != 0) entries.emplace_back(static_cast<std::uint32_t>(j + 1), degrees[j]);
  }
  return MultiIndex(std::move(entries));
}

MultiIndex MultiIndex::unit(std::uint32_t dimension, std::uint32_t degree) {
  return MultiIndex({{dimension, degree}});
}

std::uint32_t MultiIndex::degree(std::uint32_t dimension) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{dimension, 0});
  return (it != entries_.end() && it->first == dimension) ? it->second : 0;
}

bool MultiIndex::is_below(const MultiIndex& other) const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.second <= other.degree(e.first); });
}

std::string MultiIndex::to_string() const {
  if (entries_.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) os << ' ';
    os << entries_[i].first << ':' << entries_[i].second;
  }
  return os.str();
}

MultiIndex MultiIndex::parse(const std::string& text) {
  std::istringstream is(text);
  std::string token;
  std::vector<Entry> entries;
  bool saw_zero = false;
  while (is >> token) {
    if (token == "0") {
      saw_zero = true;
      continue;
    }
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw StructuralError("malformed multi-index token '" + token + "'");
    }
    try {
      const unsigned long dim = std::stoul(token.substr(0, colon));
      const unsigned long deg = std::stoul(token.substr(colon + 1));
      entries.emplace_back(static_cast<std::uint32_t>(dim), static_cast<std::uint32_t>(deg));
    } catch (const std::logic_error&) {
      throw StructuralError("malformed multi-index token '" + token + "'");
    }
  }
  if (saw_zero && !entries.empty()) {
    throw StructuralError("zero token mixed with entries in '" + text + "'");
  }
  return MultiIndex(std::move(entries));
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& nu) { return os << nu.to_string(); }

WeightRule::WeightRule(Kind kind, double a, double b, std::uint32_t dims,
                       std::vector<double> values)
    : kind_(kind), a_(a), b_(b), dims_(dims), values_(std::move(values)) {}

WeightRule WeightRule::constant(double beta, std::uint32_t dimensions) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("constant weight needs beta >= 1");
  return WeightRule(Kind::constant, beta, 0.0, dimensions, {});
}

WeightRule WeightRule::polynomial(double c, double alpha) {
  if (!(c >= 1.0) || !std::isfinite(c)) throw DomainError("polynomial weight needs c >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("polynomial weight needs alpha > 0");
  return WeightRule(Kind::polynomial, c, alpha, 0, {});
}

WeightRule WeightRule::explicit_values(std::vector<double> values) {
  for (double v : values) {
    if (!(v >= 1.0)) throw DomainError("explicit weights must be >= 1");
  }
  return WeightRule(Kind::explicit_values, 0.0, 0.0, 0, std::move(values));
}

double WeightRule::value(std::uint32_t j) const {
  if (j == 0) throw DomainError("weight rule dimensions are numbered from 1");
  switch (kind_) {
    case Kind::constant:
      return (dims_ == 0 || j <= dims_) ? a_ : kInf;
    case Kind::polynomial:
      return a_ * std::pow(static_cast<double>(j), b_);
    case Kind::explicit_values:
      return j <= values_.size() ? values_[j - 1] : kInf;
  }
  return kInf;
}

std::uint32_t WeightRule::finite_dimensions() const noexcept {
  switch (kind_) {
    case Kind::constant: return dims_;
    case Kind::polynomial: return 0;
    case Kind::explicit_values: return static_cast<std::uint32_t>(values_.size());
  }
  return 0;
}

std::string WeightRule::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant:
      os << "constant(beta=" << a_ << ", d=" << (dims_ == 0 ? std::string("inf") : std::to_string(dims_)) << ")";
      break;
    case Kind::polynomial:
      os << "polynomial(c=" << a_ << ", alpha=" << b_ << ")";
      break;
    case Kind::explicit_values:
      os << "explicit(";
      for (std::size_t i = 0; i < values_.size(); ++i) os << (i ? "," : "") << values_[i];
      os << ")";
      break;
  }
  return os.str();
}

double chebyshev_eval(std::uint32_t j, double t) {
  if (!(std::abs(t) <= 1.0)) {
    throw DomainError("Chebyshev argument must lie in [-1, 1], got " + std::to_string(t));
  }
  if (j == 0) return 1.0;
  return std::numbers::sqrt2 * std::cos(static_cast<double>(j) * std::acos(t));
}

double tensor_chebyshev_eval(const MultiIndex& nu, std::span<const double> y) {
  double value = 1.0;
  for (const auto& [dim, deg] : nu.entries()) {
    if (dim > y.size()) {
      throw StructuralError("parameter vector has " + std::to_string(y.size()) +
                            " coordinates but nu uses dimension " + std::to_string(dim));
    }
    value *= chebyshev_eval(deg, y[dim - 1]);
  }
  return value;
}

double omega_weight(const MultiIndex& nu, const WeightRule& v) {
  double value = std::pow(2.0, 0.5 * static_cast<double>(nu.support_size()));
  for (const auto& [dim, deg] : nu.entries()) {
    const double vj = v.value(dim);
    if (std::isinf(vj)) return kInf;
    value *= std::pow(vj, static_cast<double>(deg));
  }
  return value;
}

IndexSet::IndexSet(std::vector<MultiIndex> members, std::uint32_t max_dimension, double budget)
    : members_(std::move(members)), tau_(max_dimension), budget_(budget) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw StructuralError("index set contains duplicate multi-indices");
  }
  for (const auto& nu : members_) {
    if (tau_ != 0 && nu.max_dimension() > tau_) {
      throw StructuralError("multi-index " + nu.to_string() + " exceeds dimension bound " +
                            std::to_string(tau_));
    }
  }
}

std::size_t IndexSet::find(const MultiIndex& nu) const {
  auto it = std::lower_bound(members_.begin(), members_.end(), nu);
  if (it != members_.end() && *it == nu) return static_cast<std::size_t>(it - members_.begin());
  return members_.size();
}

bool IndexSet::is_downward_closed() const {
  // Checking every immediate predecessor suffices.
  for (const auto& nu : members_) {
    for (std::size_t i = 0; i < nu.entries().size(); ++i) {
      auto entries = nu.entries();
      entries[i].second -= 1;
      if (!contains(MultiIndex(std::move(entries)))) return false;
    }
  }
  return true;
}

std::vector<double> IndexSet::weights(const WeightRule& v) const {
  std::vector<double> out;
  out.reserve(members_.size());
  for (const auto& nu : members_) out.push_back(omega_weight(nu, v));
  return out;
}

std::string IndexSet::to_text() const {
  std::string out;
  for (const auto& nu : members_) {
    out += nu.to_string();
    out += '\n';
  }
  return out;
}

IndexSet IndexSet::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<MultiIndex> members;
  std::uint32_t tau = 0;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    members.push_back(MultiIndex::parse(line));
    tau = std::max(tau, members.back().max_dimension());
  }
  return IndexSet(std::move(members), tau, 0.0);
}

IndexSet enumerate_lambda(const WeightRule& v, double s, std::uint32_t tau) {
  if (tau == 0) throw DomainError("truncation dimension tau must be positive");
  if (!(s >= 2.0)) throw DomainError("sparsity budget s must be >= 2 so that nu = 0 qualifies");
  // Relative slack so that boundary members such as omega^2 = (sqrt 2)^4
  // survive rounding.
  const double limit = s / 2.0 * (1.0 + 1e-12);

  std::vector<double> vsq(tau);
  for (std::uint32_t j = 1; j <= tau; ++j) {
    const double vj = v.value(j);
    vsq[j - 1] = vj * vj;
    // With v_j = 1 every degree in dimension j has the same weight, so any
    // admissible first step admits all degrees.
    if (vj == 1.0 && 2.0 <= limit) {
      throw DomainError("weight rule " + v.describe() + " admits infinitely many indices (v_" +
                        std::to_string(j) + " = 1)");
    }
  }

  // cheapest[j - 1] = min_{k >= j} v_k^2, to stop descending once no later
  // dimension fits.
  std::vector<double> cheapest(tau + 1, kInf);
  for (std::uint32_t j = tau; j >= 1; --j) cheapest[j - 1] = std::min(cheapest[j], vsq[j - 1]);

  std::vector<MultiIndex> members;
  std::vector<MultiIndex::Entry> current;
  // Depth-first over dimensions; omega^2 grows monotonically along each branch.
  auto recurse = [&](auto&& self, std::uint32_t dim, double omega_sq) -> void {
    if (dim > tau || omega_sq * 2.0 * cheapest[dim - 1] > limit) {
      if (members.size() >= kMaxIndexSetSize) {
        throw GuardExceeded("index set exceeds " + std::to_string(kMaxIndexSetSize) + " members");
      }
      members.emplace_back(current);
      return;
    }
    self(self, dim + 1, omega_sq);
    const double step = vsq[dim - 1];
    if (std::isinf(step)) return;
    double w = omega_sq * 2.0;
    for (std::uint32_t k = 1;; ++k) {
      w *= step;
      if (w > limit) break;
      current.emplace_back(dim, k);
      self(self, dim + 1, w);
      current.pop_back();
    }
  };
  recurse(recurse, 1, 1.0);
  return IndexSet(std::move(members), tau, s);
}

double cardinality_bound(const WeightRule& v, double s, PolynomialBoundConstants constants) {
  switch (v.kind()) {
    case WeightRule::Kind::constant: {
      const double beta_sq = v.beta() * v.beta();
      const double d = static_cast<double>(v.dimensions());
      if (v.dimensions() == 0 || beta_sq <= 1.0) {
        throw DomainError("constant-rule cardinality bound needs beta > 1 and finite d");
      }
      const double depth = std::log(s / 2.0) / std::log(2.0 * beta_sq);
      if (d <= depth) {
        return std::pow(std::log(beta_sq * s / 2.0) / std::log(beta_sq), d);
      }
      return std::pow((1.0 + 1.0 / std::log2(beta_sq)) * std::numbers::e * d, depth);
    }
    case WeightRule::Kind::polynomial: {
      const double log_s = std::log(s);
      return constants.C * std::pow(s, constants.gamma * log_s);
    }
    case WeightRule::Kind::explicit_values:
      break;
  }
  throw DomainError("cardinality bound is only available for constant and polynomial rules");
}

Eigen::MatrixXd sample_measure(std::size_t m, std::uint32_t tau, std::uint64_t seed) {
  if (m == 0 || tau == 0) throw DomainError("sample_measure needs m >= 1 and tau >= 1");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(tau));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      samples(i, j) = std::cos(std::numbers::pi * uniform(gen));
    }
  }
  return samples;
}

}  // namespace wgcs
