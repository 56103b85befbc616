#include "wgcs/pipeline.hpp"

#include "wgcs/error.hpp"
#include "wgcs/sensing.hpp"
#include "parallel.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace wgcs {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw StructuralError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

template <typename F>
auto run_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

json config_to_json(const ExperimentConfig& c) {
  return json{
      {"operator",
       {{"mean_field", c.op.mean_field},
        {"amplitude", c.op.amplitude},
        {"decay", c.op.decay},
        {"kind", c.op.kind},
        {"j_max", c.op.j_max}}},
      {"weights",
       {{"kind", c.weights.kind},
        {"c", c.weights.c},
        {"alpha", c.weights.alpha},
        {"dimensions", c.weights.dimensions}}},
      {"p", c.p},
      {"s", c.s},
      {"c0", c.c0},
      {"seed", c.seed},
      {"mesh_nodes", c.mesh_nodes},
      {"epsilon", c.epsilon},
      {"test_size", c.test_size},
      {"load", c.load},
      {"tau", c.tau},
      {"max_iterations", c.max_iterations},
      {"tolerance", c.tolerance},
  };
}

json diagnostics_to_json(const SolveResult& r) {
  return json{
      {"status", to_string(r.status)},
      {"iterations", r.iterations},
      {"objective", r.objective},
      {"dual_objective", r.dual_objective},
      {"gap", r.gap},
      {"residuals", {{"primal", r.primal_residual}, {"dual", r.dual_residual}}},
      {"constraint_activity", r.constraint_activity},
      {"range_distance", r.range_distance},
  };
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

AffineDiffusion OperatorConfig::build() const {
  AmplitudeRule rule = kind == "algebraic"   ? AmplitudeRule::algebraic(amplitude, decay)
                       : kind == "geometric" ? AmplitudeRule::geometric(amplitude, decay)
                                             : throw DomainError("operator kind must be 'algebraic' or 'geometric'");
  return AffineDiffusion(mean_field, rule, j_max);
}

WeightRule WeightConfig::build() const {
  if (kind == "polynomial") return WeightRule::polynomial(c, alpha);
  if (kind == "constant") return WeightRule::constant(c, dimensions);
  throw DomainError("weight kind must be 'polynomial' or 'constant'");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw StructuralError("config must be a JSON object");
  ExperimentConfig c;
  try {
    reject_unknown(doc,
                   {"operator", "weights", "p", "s", "c0", "seed", "mesh_nodes", "epsilon",
                    "test_size", "load", "tau", "max_iterations", "tolerance"},
                   "config");
    if (doc.contains("operator")) {
      const auto& op = doc.at("operator");
      reject_unknown(op, {"mean_field", "amplitude", "decay", "kind", "j_max"}, "operator");
      if (op.contains("mean_field")) {
        const auto& mf = op.at("mean_field");
        c.op.mean_field = mf.is_array() ? mf.get<std::vector<double>>()
                                        : std::vector<double>{mf.get<double>()};
      }
      read_if(op, "amplitude", c.op.amplitude);
      read_if(op, "decay", c.op.decay);
      read_if(op, "kind", c.op.kind);
      read_if(op, "j_max", c.op.j_max);
    }
    if (doc.contains("weights")) {
      const auto& w = doc.at("weights");
      reject_unknown(w, {"kind", "c", "alpha", "dimensions"}, "weights");
      read_if(w, "kind", c.weights.kind);
      read_if(w, "c", c.weights.c);
      read_if(w, "alpha", c.weights.alpha);
      read_if(w, "dimensions", c.weights.dimensions);
    }
    read_if(doc, "p", c.p);
    read_if(doc, "s", c.s);
    read_if(doc, "c0", c.c0);
    read_if(doc, "seed", c.seed);
    read_if(doc, "mesh_nodes", c.mesh_nodes);
    read_if(doc, "epsilon", c.epsilon);
    read_if(doc, "test_size", c.test_size);
    read_if(doc, "load", c.load);
    read_if(doc, "tau", c.tau);
    read_if(doc, "max_iterations", c.max_iterations);
    read_if(doc, "tolerance", c.tolerance);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("config field has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const { return config_to_json(*this).dump(2); }

void ExperimentConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0, 1)");
  if (!(s >= 2.0)) throw DomainError("s must be >= 2");
  if (!(c0 > 0.0)) throw DomainError("c0 must be > 0");
  if (mesh_nodes < 1) throw DomainError("mesh_nodes must be >= 1");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  if (test_size < 1) throw DomainError("test_size must be >= 1");
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be > 0");
  if (tau > op.j_max) throw DomainError("tau must not exceed j_max");
  op.build();
  weights.build();
}

SeedStreams SeedStreams::derive(std::uint64_t seed) {
  SeedStreams out;
  out.master = seed;
  const std::uint64_t root = splitmix64(seed);
  out.sampling = splitmix64(root ^ 0x73616d706c696e67ULL);
  out.testing = splitmix64(root ^ 0x74657374696e6721ULL);
  return out;
}

std::size_t sample_count(double c0, double s, std::size_t n) {
  if (!(c0 > 0.0) || !(s > 1.0)) throw DomainError("sample count needs c0 > 0 and s > 1");
  const double ls = std::log(s);
  const double value = c0 * s * ls * ls * ls * std::log(std::max<double>(static_cast<double>(n), 2.0));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(value)));
}

Eigen::VectorXd evaluate_expansion(const IndexSet& lambda, const CoefficientMatrix& z,
                                   std::span<const double> y) {
  if (z.rows() != static_cast<Index>(lambda.size())) {
    throw StructuralError("coefficient rows do not match the index set");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(z.cols());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double t = tensor_chebyshev_eval(lambda[k], y);
    out.noalias() += t * z.row(static_cast<Index>(k)).transpose();
  }
  return out;
}

ErrorEstimate evaluate_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                              const ReferenceSolution& reference, std::uint32_t dims,
                              std::uint64_t seed, std::size_t test_size, unsigned threads) {
  if (dims < lambda.max_dimension()) throw StructuralError("test dimension below index set dimension");
  const Eigen::MatrixXd draws = sample_measure(test_size, dims, seed);
  std::vector<double> err2(test_size), ref2(test_size);
  parallel_for(test_size, threads, [&](std::size_t i) {
    const Eigen::VectorXd y = draws.row(static_cast<Index>(i)).transpose();
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    const Eigen::VectorXd truth = reference(ys);
    const Eigen::VectorXd approx = evaluate_expansion(lambda, z, ys);
    if (truth.size() != approx.size()) throw StructuralError("reference and expansion differ in length");
    err2[i] = (approx - truth).squaredNorm();
    ref2[i] = truth.squaredNorm();
  });
  ErrorEstimate out;
  out.samples = test_size;
  double err_sum = 0.0, ref_sum = 0.0;
  for (std::size_t i = 0; i < test_size; ++i) {
    out.linf = std::max(out.linf, std::sqrt(err2[i]));
    out.reference_linf = std::max(out.reference_linf, std::sqrt(ref2[i]));
    err_sum += err2[i];
    ref_sum += ref2[i];
  }
  out.l2 = std::sqrt(err_sum / static_cast<double>(test_size));
  out.reference_l2 = std::sqrt(ref_sum / static_cast<double>(test_size));
  return out;
}

ErrorEstimate evaluate_pde_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                                  const AffineDiffusion& op, const FemMesh& mesh,
                                  const Eigen::VectorXd& load, std::uint64_t seed,
                                  std::size_t test_size, unsigned threads) {
  ReferenceSolution reference = [&](std::span<const double> y) {
    return solve_snapshot(op, y, mesh, load).transformed;
  };
  return evaluate_errors(lambda, z, reference, op.j_max(), seed, test_size, threads);
}

ExpansionErrorEstimate evaluate_expansion_errors(const IndexSet& lambda, const CoefficientMatrix& z,
                                                 const CoefficientMatrix& z_ref,
                                                 const std::vector<double>& omega,
                                                 std::uint64_t seed, std::size_t test_size,
                                                 unsigned threads) {
  if (z.rows() != z_ref.rows() || z.cols() != z_ref.cols()) {
    throw StructuralError("expansions have different shapes");
  }
  if (omega.size() != lambda.size()) throw StructuralError("one weight per index is required");
  ReferenceSolution reference = [&](std::span<const double> y) {
    return evaluate_expansion(lambda, z_ref, y);
  };
  ExpansionErrorEstimate out;
  out.monte_carlo = evaluate_errors(lambda, z, reference, std::max(1u, lambda.max_dimension()), seed,
                                    test_size, threads);
  const Eigen::MatrixXd diff = z - z_ref;
  out.coefficient_frobenius = diff.norm();
  for (std::size_t k = 0; k < omega.size(); ++k) {
    out.coefficient_weighted_l21 += omega[k] * diff.row(static_cast<Index>(k)).norm();
  }
  return out;
}

std::string solve_diagnostics_json(const SolveResult& result) {
  return diagnostics_to_json(result).dump(2);
}

RecoveryReport run_experiment(const ExperimentConfig& config, unsigned threads) {
  using clock = std::chrono::steady_clock;
  RecoveryReport report;
  report.config = config;
  report.threads = std::max(1u, threads);
  report.seeds = SeedStreams::derive(config.seed);
  json timings = json::object();

  run_stage("config", [&] {
    config.validate();
    return 0;
  });
  const AffineDiffusion op = config.op.build();
  const WeightRule v = config.weights.build();
  const FemMesh mesh(config.mesh_nodes);
  const double mu = op.min_mean();

  auto start = clock::now();
  report.wuea = run_stage("wuea", [&] {
    WueaReport w = check_wuea(op, v, config.p);
    if (!w.pass) throw DomainError("weighted uniform ellipticity fails: " + w.diagnostic);
    return w;
  });
  // Half of epsilon is budgeted to truncation, half to discretization.
  report.tau = run_stage("truncation", [&] {
    return config.tau != 0 ? config.tau : choose_truncation(op, 0.5 * config.epsilon, mu);
  });
  report.truncation_tail = truncation_tail(op, report.tau);
  report.lambda = run_stage("index_set", [&] { return enumerate_lambda(v, config.s, report.tau); });
  report.omega = report.lambda.weights(v);
  timings["setup"] = seconds_since(start);

  const std::size_t n_idx = report.lambda.size();
  report.m = sample_count(config.c0, config.s, n_idx);
  start = clock::now();
  report.samples = sample_measure(report.m, report.tau, report.seeds.sampling);
  const Eigen::VectorXd load = assemble_load(mesh, [&](double) { return config.load; });
  report.snapshots.resize(static_cast<Index>(report.m), static_cast<Index>(mesh.n()));
  run_stage("snapshots", [&] {
    parallel_for(report.m, report.threads, [&](std::size_t i) {
      const Eigen::VectorXd y = report.samples.row(static_cast<Index>(i)).transpose();
      const Snapshot snap = solve_snapshot(
          op, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), mesh, load);
      report.snapshots.row(static_cast<Index>(i)) = snap.transformed.transpose();
    });
    return 0;
  });
  timings["snapshots"] = seconds_since(start);

  start = clock::now();
  const SensingMatrix a = run_stage("sensing", [&] {
    return build_sampling_matrix(report.lambda, report.samples, true);
  });
  const double root_m = std::sqrt(static_cast<double>(report.m));
  const Eigen::MatrixXd y_normalized = report.snapshots / root_m;
  const double radius = 2.0 * config.epsilon;
  const BlockStructure rows = BlockStructure::uniform(n_idx, 1);
  const WeightSequence w(report.omega);
  SolveSettings settings;
  settings.max_iterations = config.max_iterations;
  settings.primal_tolerance = config.tolerance;
  settings.dual_tolerance = config.tolerance;
  report.solve = run_stage("solve", [&] {
    return solve_wg_bpdn(a.entries, y_normalized, rows, w, radius, settings);
  });
  report.degraded = !report.solve.converged();
  timings["solve"] = seconds_since(start);

  json rip = nullptr;
  if (n_idx <= kBruteForceBlockLimit) {
    try {
      const RipEstimate est = empirical_wbrip(a, rows, w, 2.0 * config.s, report.threads);
      rip = json{{"delta_2s", est.delta}, {"supports_checked", est.supports_checked}};
      if (est.delta < recovery_delta_threshold()) {
        const RecoveryConstants k = recovery_constants(est.delta);
        rip["constants"] = {{"c", k.c}, {"d", k.d}, {"rho", k.rho}, {"tau", k.tau}};
        rip["noise_term_l2"] = k.d * radius;
        rip["noise_term_l21"] = k.d * std::sqrt(config.s) * radius;
      } else {
        rip["constants"] = nullptr;
      }
    } catch (const GuardExceeded&) {
      rip = nullptr;
    }
  }

  start = clock::now();
  report.errors = run_stage("errors", [&] {
    return evaluate_pde_errors(report.lambda, report.solve.z, op, mesh, load, report.seeds.testing,
                               config.test_size, report.threads);
  });
  timings["errors"] = seconds_since(start);

  json members = json::array();
  json norms = json::array();
  std::size_t active = 0;
  for (std::size_t k = 0; k < n_idx; ++k) {
    members.push_back(report.lambda[k].to_string());
    const double norm = report.solve.z.row(static_cast<Index>(k)).norm();
    norms.push_back(norm);
    if (norm != 0.0) ++active;
  }
  double max_omega = 0.0;
  for (double o : report.omega) max_omega = std::max(max_omega, o);

  json doc{
      {"schema", kReportSchema},
      {"schema_version", kReportSchemaVersion},
      {"config", config_to_json(config)},
      {"seeds",
       {{"master", report.seeds.master},
        {"sampling", report.seeds.sampling},
        {"testing", report.seeds.testing}}},
      {"threads", report.threads},
      {"wuea",
       {{"kappa", report.wuea.kappa},
        {"lp_sum", report.wuea.lp_sum},
        {"pass", report.wuea.pass},
        {"diagnostic", report.wuea.diagnostic}}},
      {"truncation", {{"tau", report.tau}, {"tail", report.truncation_tail}}},
      {"index_set",
       {{"N", n_idx},
        {"members", members},
        {"max_weight", max_omega},
        {"budget_admissible", config.s >= 2.0 * max_omega * max_omega}}},
      {"m", report.m},
      {"normalization",
       {{"matrix", "T_nu(y_i) / sqrt(m)"},
        {"snapshots", "b_i / sqrt(m), orthonormal H^1_0 coordinates"},
        {"radius", radius},
        {"unnormalized_radius", radius * root_m},
        {"note", "||A Z - Y||_F <= 2 eps on the normalized system is ||A Z - B||_F <= 2 sqrt(m) eps on the unnormalized one"}}},
      {"solver", diagnostics_to_json(report.solve)},
      {"coefficients", {{"row_norms", norms}, {"active_rows", active}}},
      {"rip", rip},
      {"errors",
       {{"linf", report.errors.linf},
        {"l2", report.errors.l2},
        {"linf_relative", report.errors.linf_relative()},
        {"l2_relative", report.errors.l2_relative()},
        {"reference_linf", report.errors.reference_linf},
        {"reference_l2", report.errors.reference_l2},
        {"test_size", report.errors.samples},
        {"reference", "direct FEM solve with all J_max fluctuations"}}},
      {"epsilon_consistency",
       {{"epsilon", config.epsilon},
        {"smallest_feasible_epsilon", report.solve.range_distance / 2.0},
        {"linf_over_epsilon", report.errors.linf / config.epsilon}}},
      {"degraded", report.degraded},
      {"timings", timings},
  };
  report.json = doc.dump(2);
  return report;
}

ReportDiff report_diff(const std::string& left_json, const std::string& right_json) {
  json left, right;
  try {
    left = json::parse(left_json);
    right = json::parse(right_json);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("report is not valid JSON: ") + e.what());
  }
  if (left.is_object()) left.erase("timings");
  if (right.is_object()) right.erase("timings");
  ReportDiff out;
  for (const auto& op : json::diff(left, right)) {
    out.differences.push_back(op.at("path").get<std::string>());
  }
  out.identical = out.differences.empty();
  return out;
}

}  // namespace wgcs
