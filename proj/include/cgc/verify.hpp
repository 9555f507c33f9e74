#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgc/constraints.hpp"
#include "cgc/network.hpp"

namespace cgc {

/// Outcome of one oracle-equivalence suite.
struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      ///< largest deviation seen, in the units of `tolerance`
  double tolerance = 0.0;
  std::size_t trials = 0;
  double seconds = 0.0;
  std::string detail;      ///< first failure, if any
};

enum class LmoMutation { None, L1Sign };

struct LmoCheckOptions {
  std::optional<ConstraintKind> only;  ///< restrict to one kind
  std::size_t trials = 1000;           ///< vertex kinds; smooth balls and graphs use fewer
  std::size_t nuclear_trials = 200;
  std::size_t nuclear_dim = 20;
  std::uint64_t seed = 0;
  /// L1Sign swaps the ℓ1 LMO for a copy that returns −λ·e_j regardless of sign(g_j).
  LmoMutation mutation = LmoMutation::None;
};

/// LMOs against brute-force oracles:
///   l1 / linf / group: vertex enumeration, |Δobjective| ≤ 1e-12, d ≤ 6
///   frobenius / pathnorm layer: sphere grid, within the grid's resolution bound
///   nuclear: Jacobi σ₁, |⟨g,s⟩ + λσ₁| ≤ 1e-6·λσ₁, ‖s‖_* = λ ± 1e-9, rank 1
///   tv: LMO and dual solver against LP vertex enumeration on small graphs
std::vector<CheckResult> check_lmo_suite(const LmoCheckOptions& options);

struct PathNormCheckOptions {
  std::size_t nets = 100;
  std::size_t inputs = 100;
  std::uint64_t seed = 0;
};

/// DP path norm vs path enumeration, per-layer γ identity, and rescale_node invariance.
std::vector<CheckResult> check_pathnorm_suite(const PathNormCheckOptions& options);

/// All connected simple graphs with 2..max_nodes nodes up to isomorphism, each
/// edge oriented by a seeded coin flip.
std::vector<IncidenceMatrix> connected_graphs(std::size_t max_nodes, std::uint64_t seed);

struct GapBenchOptions {
  std::vector<double> eps = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  std::size_t nodes = 5;
  std::size_t demands_per_graph = 2;
  std::uint64_t seed = 0;
};

struct GapBenchRow {
  double eps = 0.0;
  double mean_iterations = 0.0;
  std::size_t max_iterations = 0;
  double seconds = 0.0;
};

struct GapBenchResult {
  std::vector<GapBenchRow> rows;
  std::size_t instances = 0;
  /// Least-squares slope of log(mean_iterations + 1) against log(1/eps).
  double exponent = 0.0;
  bool monotone = true;  ///< mean iterations never increase as eps grows
};

/// Iterations of tv_dual_solve to reach each eps on every connected graph with
/// exactly `nodes` nodes, for demands A·f₀ with f₀ uniform in [0,1]^E.
GapBenchResult gap_bench(const GapBenchOptions& options);

}  // namespace cgc
