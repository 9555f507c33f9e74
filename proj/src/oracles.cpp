#include "cgc/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace cgc {

namespace {

struct SphereGrid {
  std::vector<std::vector<double>> points;
  double max_angle = 0.0;  ///< angular distance from any unit vector to the nearest grid point
};

SphereGrid sphere_grid(std::size_t d, std::size_t resolution) {
  const double pi = std::numbers::pi;
  SphereGrid grid;
  if (d == 1) {
    grid.points = {{1.0}, {-1.0}};
  } else if (d == 2) {
    for (std::size_t i = 0; i < resolution; ++i) {
      const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(resolution);
      grid.points.push_back({std::cos(t), std::sin(t)});
    }
    grid.max_angle = pi / static_cast<double>(resolution);
  } else if (d == 3) {
    for (std::size_t i = 0; i <= resolution; ++i) {
      const double theta = pi * static_cast<double>(i) / static_cast<double>(resolution);
      for (std::size_t j = 0; j < resolution; ++j) {
        const double phi = 2.0 * pi * static_cast<double>(j) / static_cast<double>(resolution);
        grid.points.push_back({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
      }
    }
    grid.max_angle = 1.5 * pi / static_cast<double>(resolution);
  } else {
    throw UnsupportedError("sphere grid oracle needs dimension 1, 2 or 3");
  }
  return grid;
}

void consider(OracleLmo& best, const ParamBlock& candidate, std::span<const double> g) {
  double value = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) value += g[i] * candidate[i];
  if (best.candidates == 0 || value < best.objective) {
    best.objective = value;
    best.direction = candidate;
  }
  ++best.candidates;
}

void group_vertices(const ParamBlock& g, double lambda, std::size_t layer, ParamBlock& current, OracleLmo& best) {
  if (layer == g.num_layers()) {
    consider(best, current, g.values());
    return;
  }
  const std::size_t offset = g.offset(layer);
  for (std::size_t j = 0; j < g.shape(layer).size(); ++j) {
    for (double sign : {1.0, -1.0}) {
      current[offset + j] = sign * lambda;
      group_vertices(g, lambda, layer + 1, current, best);
      current[offset + j] = 0.0;
    }
  }
}

}  // namespace

OracleLmo brute_force_lmo(const ParamBlock& g, const ConstraintSpec& spec, std::size_t resolution) {
  const std::size_t d = g.size();
  const double lambda = spec.lambda;
  OracleLmo best;
  switch (spec.kind) {
    case ConstraintKind::L1: {
      if (d > 12) throw UnsupportedError("brute_force_lmo: l1 oracle limited to 12 coordinates");
      for (std::size_t i = 0; i < d; ++i) {
        for (double sign : {1.0, -1.0}) {
          ParamBlock v = g.zeros_like();
          v[i] = sign * lambda;
          consider(best, v, g.values());
        }
      }
      return best;
    }
    case ConstraintKind::LInf: {
      if (d > 16) throw UnsupportedError("brute_force_lmo: linf oracle limited to 16 coordinates");
      for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        ParamBlock v = g.zeros_like();
        for (std::size_t i = 0; i < d; ++i) v[i] = (mask >> i) & 1U ? lambda : -lambda;
        consider(best, v, g.values());
      }
      return best;
    }
    case ConstraintKind::GroupL1Inf: {
      if (d > 12) throw UnsupportedError("brute_force_lmo: group oracle limited to 12 coordinates");
      ParamBlock current = g.zeros_like();
      group_vertices(g, lambda, 0, current, best);
      return best;
    }
    case ConstraintKind::Frobenius: {
      std::vector<double> ones(d, 1.0);
      OracleLmo r = brute_force_lmo_ellipsoid(g.values(), ones, lambda, resolution);
      ParamBlock shaped = g.zeros_like();
      std::copy(r.direction.values().begin(), r.direction.values().end(), shaped.values().begin());
      r.direction = std::move(shaped);
      return r;
    }
    default:
      throw UnsupportedError("brute_force_lmo: no enumeration oracle for " + std::string(to_string(spec.kind)));
  }
}

OracleLmo brute_force_lmo_ellipsoid(std::span<const double> g, std::span<const double> scale, double lambda,
                                    std::size_t resolution) {
  if (g.size() != scale.size()) throw DimensionError("brute_force_lmo_ellipsoid: scale length mismatch");
  for (double s : scale) {
    if (!(s > 0.0)) throw DegenerateInputError("brute_force_lmo_ellipsoid: scale entries must be positive");
  }
  const SphereGrid grid = sphere_grid(g.size(), resolution);
  OracleLmo best;
  std::vector<double> w(g.size());
  for (const auto& u : grid.points) {
    double value = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      w[i] = lambda * u[i] / scale[i];
      value += g[i] * w[i];
    }
    if (best.candidates == 0 || value < best.objective) {
      best.objective = value;
      best.direction = ParamBlock::vector(w);
    }
    ++best.candidates;
  }
  double scaled_norm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) scaled_norm += (g[i] / scale[i]) * (g[i] / scale[i]);
  best.resolution_bound = lambda * std::sqrt(scaled_norm) * (1.0 - std::cos(grid.max_angle));
  return best;
}

namespace {

void walk_paths(const FeedForwardNet& net, std::size_t layer, std::size_t node, double product, double& total,
                std::size_t& count) {
  if (layer == net.depth()) {
    total += product * product;
    ++count;
    return;
  }
  for (std::size_t next = 0; next < net.layer_sizes()[layer + 1]; ++next) {
    walk_paths(net, layer + 1, next, product * net.weight(layer, next, node), total, count);
  }
}

}  // namespace

double brute_force_path_norm(const FeedForwardNet& net) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < net.input_dim(); ++i) walk_paths(net, 0, i, 1.0, total, count);
  return total;
}

std::size_t count_paths(const FeedForwardNet& net) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < net.input_dim(); ++i) walk_paths(net, 0, i, 1.0, total, count);
  return count;
}

std::vector<double> jacobi_singular_values(const Matrix& m, double tol, std::size_t max_sweeps) {
  const std::size_t n = m.cols();
  // B = MᵀM, symmetric positive semidefinite.
  std::vector<double> b(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
      b[i * n + j] = s;
      b[j * n + i] = s;
    }
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& { return b[i * n + j]; };
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += at(i, i) * at(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off <= tol * tol * diag) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = std::sqrt(std::max(0.0, at(i, i)));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

LpSolution brute_force_lp(const LinearProgram& lp, double feas_tol) {
  const std::size_t n = lp.num_vars();
  const std::size_t n_eq = lp.eq_rhs.size();
  const std::size_t n_ub = lp.ub_rhs.size();
  if ((n_eq > 0 && (lp.eq_lhs.rows() != n_eq || lp.eq_lhs.cols() != n)) ||
      (n_ub > 0 && (lp.ub_lhs.rows() != n_ub || lp.ub_lhs.cols() != n)) || lp.lower.size() != n ||
      lp.upper.size() != n) {
    throw DimensionError("brute_force_lp: inconsistent problem dimensions");
  }
  if (n == 0 || n > 12) throw UnsupportedError("brute_force_lp: supports 1 to 12 variables");

  // Every inequality in the form a·x ≤ h; bounds become ±eᵢ rows.
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < n_ub; ++i) {
    rows.emplace_back(lp.ub_lhs.row(i).begin(), lp.ub_lhs.row(i).end());
    rhs.push_back(lp.ub_rhs[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(lp.upper[j])) {
      rows.emplace_back(n, 0.0);
      rows.back()[j] = 1.0;
      rhs.push_back(lp.upper[j]);
    }
    if (std::isfinite(lp.lower[j])) {
      rows.emplace_back(n, 0.0);
      rows.back()[j] = -1.0;
      rhs.push_back(-lp.lower[j]);
    }
  }
  const std::size_t m = rows.size();

  Eigen::MatrixXd eq(n_eq, n);
  for (std::size_t i = 0; i < n_eq; ++i) {
    for (std::size_t j = 0; j < n; ++j) eq(i, j) = lp.eq_lhs(i, j);
  }
  // Rank decisions use a threshold far above rounding noise: a demand that sums to
  // zero only up to 1e-16 must not count as an extra independent equality.
  constexpr double kRankThreshold = 1e-10;
  std::size_t eq_rank = 0;
  if (n_eq > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> eq_lu(eq);
    eq_lu.setThreshold(kRankThreshold);
    eq_rank = static_cast<std::size_t>(eq_lu.rank());
  }
  const std::size_t k = n - eq_rank;

  LpSolution best;
  if (k > m) return best;

  auto feasible = [&](const Eigen::VectorXd& x) {
    for (std::size_t i = 0; i < n_eq; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += lp.eq_lhs(i, j) * x[j];
      if (std::abs(s - lp.eq_rhs[i]) > feas_tol * std::max(1.0, std::abs(lp.eq_rhs[i]))) return false;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += rows[i][j] * x[j];
      if (s > rhs[i] + feas_tol * std::max(1.0, std::abs(rhs[i]))) return false;
    }
    return true;
  };

  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  Eigen::MatrixXd sys(n_eq + k, n);
  Eigen::VectorXd b(n_eq + k);
  sys.topRows(n_eq) = eq;
  for (std::size_t i = 0; i < n_eq; ++i) b[i] = lp.eq_rhs[i];
  while (true) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < n; ++j) sys(n_eq + i, j) = rows[pick[i]][j];
      b[n_eq + i] = rhs[pick[i]];
    }
    ++best.bases_examined;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    lu.setThreshold(kRankThreshold);
    if (static_cast<std::size_t>(lu.rank()) == n) {
      const Eigen::VectorXd x = lu.solve(b);
      if ((sys * x - b).norm() <= feas_tol * std::max(1.0, b.norm()) && feasible(x)) {
        double value = 0.0;
        for (std::size_t j = 0; j < n; ++j) value += lp.objective[j] * x[j];
        if (best.status == LpStatus::Infeasible || value > best.value) {
          best.status = LpStatus::Optimal;
          best.value = value;
          best.x.assign(x.data(), x.data() + n);
        }
      }
    }
    // Next k-combination of {0, …, m−1} in lexicographic order.
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace cgc
