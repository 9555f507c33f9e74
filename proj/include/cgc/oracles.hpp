#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cgc/constraints.hpp"
#include "cgc/linalg.hpp"
#include "cgc/network.hpp"

namespace cgc {

// Brute-force reference implementations. None of them calls the routine it is
// meant to check: vertex sets, grids, path lists and LP bases are enumerated
// explicitly.

struct OracleLmo {
  ParamBlock direction;
  double objective = 0.0;
  std::size_t candidates = 0;  ///< vertices or grid points examined
  /// Upper bound on objective − true minimum (0 for vertex enumeration).
  double resolution_bound = 0.0;
};

/// Exact minimum over the vertex set of the ℓ1, ℓ∞ or per-layer group ℓ1/ℓ∞ ball,
/// or a grid minimum over the Frobenius sphere (total dimension ≤ 3,
/// `resolution` points per angle). Other kinds throw UnsupportedError.
OracleLmo brute_force_lmo(const ParamBlock& g, const ConstraintSpec& spec, std::size_t resolution = 2000);

/// Grid minimum of ⟨g, w⟩ over the ellipsoid ‖diag(scale)·w‖₂ = λ (d ≤ 3, all scale > 0).
OracleLmo brute_force_lmo_ellipsoid(std::span<const double> g, std::span<const double> scale, double lambda,
                                    std::size_t resolution = 2000);

/// ‖W‖_π² by listing every input→output path and summing squared weight
/// products (≤ 4 weight layers, ≤ 4 nodes per layer).
double brute_force_path_norm(const FeedForwardNet& net);
std::size_t count_paths(const FeedForwardNet& net);

/// Singular values in decreasing order from cyclic Jacobi rotations on MᵀM, one per
/// column (wide matrices get trailing zeros).
std::vector<double> jacobi_singular_values(const Matrix& m, double tol = 1e-15, std::size_t max_sweeps = 100);

/// maximize cᵀx s.t. eq_lhs·x = eq_rhs, ub_lhs·x ≤ ub_rhs, lower ≤ x ≤ upper.
/// Empty matrices mean "no constraints of that type"; bounds may be ±infinity.
struct LinearProgram {
  std::vector<double> objective;
  Matrix eq_lhs;
  std::vector<double> eq_rhs;
  Matrix ub_lhs;
  std::vector<double> ub_rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit LinearProgram(std::size_t num_vars)
      : objective(num_vars, 0.0),
        lower(num_vars, -std::numeric_limits<double>::infinity()),
        upper(num_vars, std::numeric_limits<double>::infinity()) {}
  std::size_t num_vars() const { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
  std::size_t bases_examined = 0;
};

/// Exact optimum by enumerating basic feasible solutions: every choice of
/// tight inequality/bound rows that, with the equalities, pins x uniquely.
/// Assumes the optimum is attained at a vertex (bounded feasible region, or at
/// least a pointed one with a finite optimum). Meant for ≤ 12 variables.
LpSolution brute_force_lp(const LinearProgram& lp, double feas_tol = 1e-9);

}  // namespace cgc
