// wgcs: command line front end.
//
// Exit codes: 0 success, 2 validation failure, 3 non-convergence.

#include "wgcs/block_model.hpp"
#include "wgcs/csv.hpp"
#include "wgcs/error.hpp"
#include "wgcs/multiindex.hpp"
#include "wgcs/pipeline.hpp"
#include "wgcs/sensing.hpp"
#include "wgcs/solver.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned threads = 1;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw wgcs::StructuralError("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config, "JSON configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "Override the configured seed");
  cmd->add_option("--out", opts.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", opts.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

wgcs::ExperimentConfig load_experiment(const CommonOptions& opts) {
  auto config = wgcs::ExperimentConfig::from_json(read_file(opts.config));
  if (opts.seed) config.seed = *opts.seed;
  return config;
}

// lambda: enumerate the index set for the configured weights, budget and
// truncation.
int run_lambda(const CommonOptions& opts) {
  const auto config = load_experiment(opts);
  const auto op = config.op.build();
  const auto v = config.weights.build();
  const std::uint32_t tau =
      config.tau != 0 ? config.tau : wgcs::choose_truncation(op, 0.5 * config.epsilon, op.min_mean());
  const auto lambda = wgcs::enumerate_lambda(v, config.s, tau);
  const auto out = prepare_out(opts.out);
  write_file(out / "lambda.txt", lambda.to_text());
  json summary{{"N", lambda.size()}, {"tau", tau}, {"s", config.s}, {"weights", v.describe()}};
  if (v.kind() == wgcs::WeightRule::Kind::constant) {
    summary["cardinality_bound"] = wgcs::cardinality_bound(v, config.s);
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// rip-check: exhaustive weighted block RIP constants of random matrices over a
// sweep of budgets.
//
// {"ensemble": "gaussian", "m": 8, "blocks": 12, "block_size": 1,
//  "weights": [..] | "weight": 1.0, "s": [1, 2, 3], "trials": 5,
//  "matrix": "optional/A.csv"}
int run_rip_check(const CommonOptions& opts) {
  const json cfg = json::parse(read_file(opts.config));
  const std::uint64_t seed = opts.seed.value_or(cfg.value("seed", std::uint64_t{1}));
  const std::size_t blocks = cfg.at("blocks").get<std::size_t>();
  const auto width = cfg.value("block_size", wgcs::Index{1});
  std::vector<double> weights = cfg.contains("weights")
                                    ? cfg.at("weights").get<std::vector<double>>()
                                    : std::vector<double>(blocks, cfg.value("weight", 1.0));
  const wgcs::WeightSequence w(weights);
  const auto structure = wgcs::BlockStructure::uniform(blocks, width);
  const std::vector<double> budgets = cfg.at("s").get<std::vector<double>>();

  std::vector<wgcs::SensingMatrix> matrices;
  if (cfg.contains("matrix")) {
    fs::path path = cfg.at("matrix").get<std::string>();
    if (path.is_relative()) path = fs::path(opts.config).parent_path() / path;
    matrices.push_back({wgcs::read_matrix_csv(path.string()), true,
                        wgcs::MatrixProvenance::external});
  } else {
    const std::string kind = cfg.value("ensemble", std::string("gaussian"));
    const auto ensemble = kind == "gaussian"     ? wgcs::RandomEnsemble::gaussian
                          : kind == "rademacher" ? wgcs::RandomEnsemble::rademacher
                          : kind == "uniform"    ? wgcs::RandomEnsemble::uniform
                                                 : throw wgcs::DomainError("unknown ensemble " + kind);
    const auto m = cfg.at("m").get<wgcs::Index>();
    const std::size_t trials = cfg.value("trials", std::size_t{1});
    for (std::size_t t = 0; t < trials; ++t) {
      matrices.push_back(wgcs::random_matrix(ensemble, m, structure.total_size(), seed + t));
    }
  }

  const auto out = prepare_out(opts.out);
  std::ofstream csv(out / "rip.csv");
  csv << "trial,s,delta,supports\n";
  csv.precision(17);
  json summary = json::array();
  for (double s : budgets) {
    double worst = 0.0;
    for (std::size_t t = 0; t < matrices.size(); ++t) {
      const auto est = wgcs::empirical_wbrip(matrices[t], structure, w, s, opts.threads);
      csv << t << ',' << s << ',' << est.delta << ',' << est.supports_checked << '\n';
      worst = std::max(worst, est.delta);
    }
    summary.push_back({{"s", s}, {"max_delta", worst}, {"matrices", matrices.size()}});
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// recover: solve the weighted group problem for CSV inputs.
//
// {"A": "A.csv", "Y": "Y.csv", "block_size": 1 | "block_sizes": [..],
//  "weights": [..], "eta": 0.0, "max_iterations": 100000, "tolerance": 1e-8}
int run_recover(const CommonOptions& opts) {
  const json cfg = json::parse(read_file(opts.config));
  const fs::path base = fs::path(opts.config).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  const Eigen::MatrixXd a = wgcs::read_matrix_csv(resolve(cfg.at("A").get<std::string>()).string());
  const Eigen::MatrixXd y = wgcs::read_matrix_csv(resolve(cfg.at("Y").get<std::string>()).string());
  std::vector<wgcs::Index> sizes;
  if (cfg.contains("block_sizes")) {
    sizes = cfg.at("block_sizes").get<std::vector<wgcs::Index>>();
  } else {
    const auto width = cfg.value("block_size", wgcs::Index{1});
    if (width < 1 || a.cols() % width != 0) throw wgcs::StructuralError("block_size must divide the column count");
    sizes.assign(static_cast<std::size_t>(a.cols() / width), width);
  }
  const wgcs::BlockStructure rows(sizes);
  const wgcs::WeightSequence w(cfg.contains("weights") ? cfg.at("weights").get<std::vector<double>>()
                                                       : std::vector<double>(sizes.size(), 1.0));
  wgcs::SolveSettings settings;
  settings.max_iterations = cfg.value("max_iterations", settings.max_iterations);
  settings.primal_tolerance = settings.dual_tolerance = cfg.value("tolerance", 1e-8);
  const auto result = wgcs::solve_wg_bpdn(a, y, rows, w, cfg.value("eta", 0.0), settings);

  const auto out = prepare_out(opts.out);
  wgcs::write_matrix_csv((out / "Z.csv").string(), result.z);
  const std::string diag = wgcs::solve_diagnostics_json(result);
  write_file(out / "diagnostics.json", diag + "\n");
  std::cout << diag << "\n";
  return result.converged() ? kExitOk : kExitNotConverged;
}

// pde-demo: the full recovery pipeline for the parametric diffusion problem.
int run_pde_demo(const CommonOptions& opts) {
  const auto config = load_experiment(opts);
  const auto report = wgcs::run_experiment(config, opts.threads);
  const auto out = prepare_out(opts.out);
  write_file(out / "report.json", report.json + "\n");
  write_file(out / "lambda.txt", report.lambda.to_text());
  write_file(out / "diagnostics.json", wgcs::solve_diagnostics_json(report.solve) + "\n");
  wgcs::write_matrix_csv((out / "coefficients.csv").string(), report.solve.z);
  wgcs::write_matrix_csv((out / "snapshots.csv").string(), report.snapshots);
  wgcs::write_matrix_csv((out / "samples.csv").string(), report.samples);
  std::cout << "N=" << report.lambda.size() << " m=" << report.m << " tau=" << report.tau
            << " solver=" << wgcs::to_string(report.solve.status)
            << " linf_relative=" << report.errors.linf_relative()
            << " l2_relative=" << report.errors.l2_relative() << "\n";
  return report.degraded ? kExitNotConverged : kExitOk;
}

int run_report_diff(const std::string& left, const std::string& right) {
  const auto diff = wgcs::report_diff(read_file(left), read_file(right));
  if (diff.identical) {
    std::cout << "reports identical (timings ignored)\n";
    return kExitOk;
  }
  for (const auto& path : diff.differences) std::cout << "differs: " << path << "\n";
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted group-sparse recovery of parametric PDE solutions"};
  app.require_subcommand(1);

  CommonOptions lambda_opts, rip_opts, recover_opts, demo_opts;
  auto* lambda_cmd = app.add_subcommand("lambda", "Enumerate and persist the index set");
  add_common(lambda_cmd, lambda_opts, true);
  auto* rip_cmd = app.add_subcommand("rip-check", "Exhaustive weighted block RIP sweep");
  add_common(rip_cmd, rip_opts, true);
  auto* recover_cmd = app.add_subcommand("recover", "Solve from CSV matrix and snapshots");
  add_common(recover_cmd, recover_opts, true);
  auto* demo_cmd = app.add_subcommand("pde-demo", "Run the parametric diffusion pipeline");
  add_common(demo_cmd, demo_opts, true);
  auto* diff_cmd = app.add_subcommand("report-diff", "Compare two report JSON files, ignoring timings");
  std::string left, right;
  diff_cmd->add_option("left", left, "First report")->required();
  diff_cmd->add_option("right", right, "Second report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*lambda_cmd) return run_lambda(lambda_opts);
    if (*rip_cmd) return run_rip_check(rip_opts);
    if (*recover_cmd) return run_recover(recover_opts);
    if (*demo_cmd) return run_pde_demo(demo_opts);
    if (*diff_cmd) return run_report_diff(left, right);
  } catch (const wgcs::StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
