// cgc: train networks with conditional gradient methods and run the oracle checks.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cgc/config.hpp"
#include "cgc/experiment.hpp"
#include "cgc/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitRuntime = 4;

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string kind;
};

cgc::ExperimentConfig load(const CommonArgs& args, bool for_training = false) {
  std::vector<std::string> overrides = args.sets;
  if (!args.out.empty()) overrides.push_back("out=" + args.out);
  if (!args.config.empty()) return cgc::parse_config(args.config, overrides, for_training);
  std::optional<std::string> env_seed;
  if (const char* s = std::getenv("CGC_SEED")) env_seed = std::string(s);
  return cgc::parse_config_text("", overrides, env_seed, for_training);
}

void print_checks(const std::vector<cgc::CheckResult>& results) {
  std::printf("%-30s %-6s %12s %10s %8s %9s\n", "suite", "result", "worst", "tolerance", "trials", "seconds");
  for (const auto& r : results) {
    std::printf("%-30s %-6s %12.3e %10.1e %8zu %9.3f\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.worst,
                r.tolerance, r.trials, r.seconds);
    if (!r.passed) std::printf("  first failure: %s\n", r.detail.c_str());
  }
}

bool all_passed(const std::vector<cgc::CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

int cmd_train(const CommonArgs& args) {
  const cgc::ExperimentConfig config = load(args, true);
  const cgc::ExperimentOutput out = cgc::run_experiment(config);
  if (config.iterations == 0) std::printf("empty run: 0 iterations, metrics.csv holds the header only\n");
  std::printf("%-24s %s\n", "metrics", out.csv.string().c_str());
  std::printf("%-24s %s\n", "summary", out.summary.string().c_str());
  std::printf("%-24s %.6f\n", "final_train_err", out.final_train_err);
  std::printf("%-24s %.6f\n", "final_test_err", out.final_test_err);
  std::printf("%-24s %.9g\n", "final_constraint_value", out.final_constraint_value);
  std::printf("%-24s %.1f\n", "total_wall_ms", out.total_wall_ms);
  const auto& m = out.result.metrics;
  if (m.dead_path_coordinates > 0) std::printf("%-24s %zu\n", "dead_path_coordinates", m.dead_path_coordinates);
  if (m.clamped_steps > 0) std::printf("%-24s %zu\n", "clamped_steps", m.clamped_steps);
  if (m.degenerate_steps > 0) std::printf("%-24s %zu\n", "degenerate_steps", m.degenerate_steps);
  return kExitOk;
}

int cmd_check_lmo(const CommonArgs& args) {
  const cgc::ExperimentConfig config = load(args);
  cgc::LmoCheckOptions options;
  options.seed = config.seed;
  options.trials = config.check.trials;
  if (config.check.inject == "l1_sign") options.mutation = cgc::LmoMutation::L1Sign;
  if (!args.kind.empty()) {
    options.only = cgc::parse_constraint_kind(args.kind);
    if (!options.only) throw cgc::ConfigError("--kind: unknown constraint '" + args.kind + "'");
  }
  const auto results = cgc::check_lmo_suite(options);
  print_checks(results);
  return all_passed(results) ? kExitOk : kExitVerify;
}

int cmd_check_pathnorm(const CommonArgs& args) {
  const cgc::ExperimentConfig config = load(args);
  cgc::PathNormCheckOptions options;
  options.seed = config.seed;
  const auto results = cgc::check_pathnorm_suite(options);
  print_checks(results);
  return all_passed(results) ? kExitOk : kExitVerify;
}

int cmd_gap_bench(const CommonArgs& args) {
  const cgc::ExperimentConfig config = load(args);
  cgc::GapBenchOptions options;
  options.seed = config.seed;
  const cgc::GapBenchResult result = cgc::gap_bench(options);
  std::printf("%d-node graphs, %zu instances\n", static_cast<int>(options.nodes), result.instances);
  std::printf("%10s %16s %14s %9s\n", "eps", "mean_iterations", "max_iterations", "seconds");
  for (const auto& row : result.rows) {
    std::printf("%10.0e %16.1f %14zu %9.3f\n", row.eps, row.mean_iterations, row.max_iterations, row.seconds);
  }
  std::printf("fitted exponent %.3f (limit 1.3), monotone %s\n", result.exponent, result.monotone ? "yes" : "no");
  return result.exponent <= 1.3 && result.monotone ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-gradient training and oracle checks"};
  app.require_subcommand(1);
  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "Config file (flat key = value lines)");
    sub->add_option("--set", args.sets, "Override a config key, KEY=VALUE (repeatable)");
    sub->add_option("--out", args.out, "Output directory (same as --set out=DIR)");
  };
  auto* train = app.add_subcommand("train", "Run one experiment and write metrics.csv and summary.json");
  auto* check_lmo = app.add_subcommand("check-lmo", "Compare every LMO with its brute-force oracle");
  auto* check_pathnorm = app.add_subcommand("check-pathnorm", "Path-norm DP, gamma identity and rescaling checks");
  auto* gap = app.add_subcommand("gap-bench", "Iterations of the TV dual solver against 1/eps");
  for (auto* sub : {train, check_lmo, check_pathnorm, gap}) add_common(sub);
  check_lmo->add_option("--kind", args.kind, "Restrict to one constraint kind (e.g. nuclear, l1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*train) return cmd_train(args);
    if (*check_lmo) return cmd_check_lmo(args);
    if (*check_pathnorm) return cmd_check_pathnorm(args);
    if (*gap) return cmd_gap_bench(args);
  } catch (const cgc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
