#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgc/linalg.hpp"
#include "cgc/network.hpp"

namespace cgc {

enum class ConstraintKind { Frobenius, Nuclear, L1, LInf, GroupL1Inf, TV, PathNorm };

/// Canonical name, e.g. "FrobeniusBall".
std::string_view to_string(ConstraintKind kind);
/// Accepts canonical names and the short forms frobenius, nuclear, l1, linf, group, tv, pathnorm.
std::optional<ConstraintKind> parse_constraint_kind(std::string_view name);

/// Feasible set {W : R(W) ≤ lambda}.
///
/// Norms over a multi-layer parameter block: Frobenius, ℓ1 and ℓ∞ act on the
/// flattened vector, Nuclear is the sum of per-layer nuclear norms,
/// GroupL1Inf is max over layers of the layer ℓ1 norm, TV is ‖A·W‖₁ for the
/// incidence matrix A, PathNorm is ‖W‖_π of the network. Path-norm scaling
/// factors depend on the current iterate and are recomputed by the optimizer.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::Frobenius;
  double lambda = 1.0;
  double eps = 1e-6;   ///< TV accuracy
  double tol = 1e-12;  ///< power-method relative tolerance
  std::uint64_t seed = 0;
  std::optional<IncidenceMatrix> incidence;  ///< required by TV, absent otherwise

  /// Throws ConfigError if lambda ≤ 0 or the incidence presence does not match the kind.
  void validate() const;
};

/// s ∈ argmin ⟨g, W⟩ s.t. R(W) ≤ λ.
struct LmoResult {
  ParamBlock direction;
  double objective = 0.0;          ///< ⟨g, direction⟩
  bool degenerate = false;         ///< zero gradient: direction left at 0
  std::size_t dead_coordinates = 0;  ///< path-norm coordinates with γ_e = 0 and g_e ≠ 0
};

// Frobenius ball (total over all layers).
LmoResult lmo_frobenius(const ParamBlock& g, double lambda);
ParamBlock project_frobenius(const ParamBlock& z, double lambda);

// Nuclear ball. The single-matrix form returns −λ·u·vᵀ for the top singular pair.
LmoResult lmo_nuclear(const Matrix& g, double lambda, double tol, std::uint64_t seed,
                      std::size_t max_iter = 200000);
/// Sum-of-layer-nuclear-norms ball: the whole budget goes to the layer with the largest σ₁.
LmoResult lmo_nuclear(const ParamBlock& g, double lambda, double tol, std::uint64_t seed);

// ℓ1 ball. Ties on |g_j| go to the lowest index.
LmoResult lmo_l1(const ParamBlock& g, double lambda);
/// Euclidean projection by soft thresholding, threshold located by sorting.
ParamBlock project_l1(const ParamBlock& z, double lambda);

// ℓ∞ ball. Coordinates with g_j = 0 get −λ.
LmoResult lmo_linf(const ParamBlock& g, double lambda);
ParamBlock project_linf(const ParamBlock& z, double lambda);

/// max_i ‖W_i‖₁ ≤ λ with one group per layer: one signed vertex per layer.
LmoResult lmo_group_l1_inf(const ParamBlock& g, double lambda);
double group_l1_inf_norm(const ParamBlock& w);

/// min ⟨g, W⟩ s.t. ‖Γ W‖₂ ≤ λ for diagonal Γ = diag(scale). For path norms pass
/// GammaTable::path_scaling(k). Coordinates with scale 0 and g ≠ 0 are unbounded;
/// they are left at 0 and counted in dead_coordinates.
LmoResult lmo_pathnorm_layer(std::span<const double> g, std::span<const double> scale, double lambda);

// ---- Total variation on graphs --------------------------------------------------

/// ‖A·W‖₁ with W in A's column (edge) order.
double tv_norm(std::span<const double> w, const IncidenceMatrix& a);

/// True iff some f ∈ [0,1]^E has A·f = β·demand. Decided by max-flow from a
/// super source feeding positive demands to a super sink draining negative ones.
bool tv_feasibility(double beta, std::span<const double> demand, const IncidenceMatrix& a);

struct TvDualResult {
  std::vector<double> potentials;  ///< v with ⟨demand, v⟩ = 1
  double beta = 0.0;               ///< Σ_e max(0, (Aᵀv)_e), within eps above β*
  std::size_t iterations = 0;
};

/// Solves min_v Σ_e max(0, (Aᵀv)_e) s.t. ⟨demand, v⟩ = 1, the LP dual of
/// max β s.t. A·f = β·demand, f ∈ [0,1]^E, so the optimal value is β*.
///
/// Accelerated projected gradient on a Huber-smoothed objective (smoothing
/// width eps / E) over the constraint hyperplane. Stops when max-flow certifies
/// that β = value − eps is primal feasible, so value − β* ≤ eps on return.
/// Throws UnboundedError for a zero demand (β* = ∞).
TvDualResult tv_dual_solve(std::span<const double> demand, const IncidenceMatrix& a, double eps,
                           std::size_t max_iter = 50'000'000);

/// Node potentials y minimizing ‖Aᵀy − g‖₂ (zero mean per connected component),
/// found by conjugate gradients on the graph Laplacian A·Aᵀ.
std::vector<double> row_space_potentials(std::span<const double> g, const IncidenceMatrix& a, double rel_tol = 1e-12);

/// Orthogonal projection of an edge vector onto the row space of A.
std::vector<double> project_row_space(std::span<const double> g, const IncidenceMatrix& a);

/// min ⟨g, W⟩ s.t. ‖A·W‖₁ ≤ λ.
///
/// With g = Aᵀy the objective is ⟨y, A·W⟩ and A·W ranges over vectors that sum
/// to zero on each connected component, so the optimum sends λ/2 units from the
/// node of smallest potential to the node of largest potential (within one
/// component), routed along a spanning-tree path. Throws UnboundedError when
/// ‖Aᵀy − g‖∞ > eps·max(1, ‖g‖∞), i.e. g has a component in the kernel of A.
LmoResult lmo_tv(const ParamBlock& g, const IncidenceMatrix& a, double lambda, double eps);

// ---- Dispatch on ConstraintSpec ------------------------------------------------

/// R(W) for the network's current weights.
double constraint_value(const ConstraintSpec& spec, const FeedForwardNet& net);

/// LMO over the whole parameter block. TV gradients are projected onto the row
/// space of A first. PathNorm has no joint LMO (the ball is unbounded); it is
/// handled layer by layer in path_cg and throws UnsupportedError here.
LmoResult linear_minimization(const ConstraintSpec& spec, const ParamBlock& g);

bool has_projection(ConstraintKind kind);
/// Euclidean projection for Frobenius, ℓ1 and ℓ∞ balls; UnsupportedError otherwise.
ParamBlock project(const ConstraintSpec& spec, const ParamBlock& z);

}  // namespace cgc
