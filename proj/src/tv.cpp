#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "cgc/constraints.hpp"
#include "cgc/maxflow.hpp"

namespace cgc {

namespace {

/// Undirected adjacency: (neighbor, edge id) pairs, in edge order.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(const IncidenceMatrix& a) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(a.num_nodes());
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    adj[a.edges()[e].source].emplace_back(a.edges()[e].target, e);
    adj[a.edges()[e].target].emplace_back(a.edges()[e].source, e);
  }
  return adj;
}

double huber_slope(double t, double mu) {
  if (t <= 0.0) return 0.0;
  if (t >= mu) return 1.0;
  return t / mu;
}

double dual_objective(std::span<const double> v, const IncidenceMatrix& a) {
  double total = 0.0;
  for (double t : a.apply_transposed(v)) total += std::max(0.0, t);
  return total;
}

}  // namespace

double tv_norm(std::span<const double> w, const IncidenceMatrix& a) { return norm1(a.apply(w)); }

bool tv_feasibility(double beta, std::span<const double> demand, const IncidenceMatrix& a) {
  if (demand.size() != a.num_nodes()) throw DimensionError("tv_feasibility: demand needs one entry per node");
  if (beta == 0.0) return true;
  const std::size_t n = a.num_nodes();
  const std::size_t source = n;
  const std::size_t sink = n + 1;
  MaxFlow flow(n + 2);
  double supply = 0.0;
  double drain = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const double d = beta * demand[v];
    if (d > 0.0) {
      flow.add_arc(source, v, d);
      supply += d;
    } else if (d < 0.0) {
      flow.add_arc(v, sink, -d);
      drain -= d;
    }
  }
  const double tol = 1e-10 * std::max(1.0, supply + drain);
  if (std::abs(supply - drain) > tol) return false;
  for (const auto& e : a.edges()) flow.add_arc(e.source, e.target, 1.0);
  return flow.solve(source, sink) >= supply - tol;
}

TvDualResult tv_dual_solve(std::span<const double> demand, const IncidenceMatrix& a, double eps,
                           std::size_t max_iter) {
  if (demand.size() != a.num_nodes()) throw DimensionError("tv_dual_solve: demand needs one entry per node");
  if (!(eps > 0.0)) throw DegenerateInputError("tv_dual_solve: eps must be positive");
  const double dd = dot(demand, demand);
  if (dd == 0.0) throw UnboundedError("tv_dual_solve: zero demand, beta is unbounded (dual infeasible)");

  auto project = [&](std::vector<double>& v) {
    const double shift = (dot(demand, v) - 1.0) / dd;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= shift * demand[i];
  };

  TvDualResult result;
  result.potentials.assign(demand.begin(), demand.end());
  for (double& x : result.potentials) x /= dd;
  result.beta = dual_objective(result.potentials, a);
  if (a.num_edges() == 0) return result;

  // Certificate: β = best − margin feasible ⇒ β* ≥ best − eps.
  const double margin = 0.99 * eps;
  auto certified = [&](double best) { return best - margin <= 0.0 || tv_feasibility(best - margin, demand, a); };
  if (certified(result.beta)) return result;

  const double mu = eps / static_cast<double>(a.num_edges());
  std::vector<std::size_t> degree(a.num_nodes(), 0);
  for (const auto& e : a.edges()) {
    ++degree[e.source];
    ++degree[e.target];
  }
  double lap_bound = 0.0;
  for (const auto& e : a.edges()) lap_bound = std::max(lap_bound, double(degree[e.source] + degree[e.target]));
  const double step = mu / lap_bound;

  std::vector<double> x = result.potentials;
  std::vector<double> y = x;
  std::vector<double> slopes(a.num_edges());
  double t = 1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const auto ay = a.apply_transposed(y);
    for (std::size_t e = 0; e < ay.size(); ++e) slopes[e] = huber_slope(ay[e], mu);
    const auto grad = a.apply(slopes);
    std::vector<double> next(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) next[i] = y[i] - step * grad[i];
    project(next);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = next[i] + momentum * (next[i] - x[i]);
    x = std::move(next);
    t = t_next;

    const double value = dual_objective(x, a);
    if (value < result.beta) {
      result.beta = value;
      result.potentials = x;
      if (certified(value)) {
        result.iterations = it;
        return result;
      }
    }
  }
  throw Error("tv_dual_solve: no certified eps-solution after " + std::to_string(max_iter) + " iterations");
}

std::vector<double> row_space_potentials(std::span<const double> g, const IncidenceMatrix& a, double rel_tol) {
  if (g.size() != a.num_edges()) throw DimensionError("row_space_potentials: expected one value per edge");
  const std::vector<double> b = a.apply(g);
  std::vector<double> y(a.num_nodes(), 0.0);
  std::vector<double> r = b;
  std::vector<double> p = r;
  double rr = dot(r, r);
  const double stop = rel_tol * rel_tol * std::max(rr, std::numeric_limits<double>::min());
  const std::size_t max_iter = 10 * a.num_nodes() + 100;
  for (std::size_t it = 0; it < max_iter && rr > stop; ++it) {
    const auto lp = a.apply(a.apply_transposed(p));
    const double curvature = dot(p, lp);
    if (curvature <= 0.0) break;
    const double alpha = rr / curvature;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += alpha * p[i];
      r[i] -= alpha * lp[i];
    }
    const double rr_next = dot(r, r);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + (rr_next / rr) * p[i];
    rr = rr_next;
  }
  return y;
}

std::vector<double> project_row_space(std::span<const double> g, const IncidenceMatrix& a) {
  return a.apply_transposed(row_space_potentials(g, a));
}

LmoResult lmo_tv(const ParamBlock& g, const IncidenceMatrix& a, double lambda, double eps) {
  if (g.size() != a.num_edges()) throw DimensionError("lmo_tv: gradient needs one entry per edge");
  const auto adj = adjacency(a);
  const std::size_t n = a.num_nodes();
  const std::size_t none = std::numeric_limits<std::size_t>::max();

  // Spanning forest with potentials y satisfying y(source) − y(target) = g_e on tree edges.
  std::vector<double> y(n, 0.0);
  std::vector<std::size_t> component(n, none);
  std::vector<std::size_t> parent_edge(n, none);
  std::size_t num_components = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (component[root] != none) continue;
    component[root] = num_components;
    std::queue<std::size_t> q;
    q.push(root);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (const auto& [w, e] : adj[u]) {
        if (component[w] != none) continue;
        component[w] = num_components;
        parent_edge[w] = e;
        y[w] = a.edges()[e].source == u ? y[u] - g[e] : y[u] + g[e];
        q.push(w);
      }
    }
    ++num_components;
  }

  const double scale = std::max(1.0, norm_inf(g.values()));
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    const auto& edge = a.edges()[e];
    if (std::abs(y[edge.source] - y[edge.target] - g[e]) > eps * scale) {
      throw UnboundedError(
          "lmo_tv: gradient has a component in the kernel of the incidence matrix; the TV ball is unbounded along "
          "it (project the gradient onto the row space first)");
    }
  }

  std::vector<std::size_t> lo(num_components, none);
  std::vector<std::size_t> hi(num_components, none);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t c = component[v];
    if (lo[c] == none || y[v] < y[lo[c]]) lo[c] = v;
    if (hi[c] == none || y[v] > y[hi[c]]) hi[c] = v;
  }
  std::size_t best = none;
  double best_range = 0.0;
  for (std::size_t c = 0; c < num_components; ++c) {
    const double range = y[hi[c]] - y[lo[c]];
    if (range > best_range) {
      best_range = range;
      best = c;
    }
  }

  LmoResult r;
  r.direction = g.zeros_like();
  if (best == none) {
    r.degenerate = true;
    return r;
  }

  // Route λ/2 from the low-potential node to the high-potential node along the tree.
  const std::size_t from = lo[best];
  const std::size_t to = hi[best];
  std::vector<std::size_t> via(n, none);
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> q;
  q.push(from);
  seen[from] = true;
  while (!q.empty() && !seen[to]) {
    const std::size_t u = q.front();
    q.pop();
    for (const auto& [w, e] : adj[u]) {
      const bool tree_edge = parent_edge[w] == e || parent_edge[u] == e;
      if (!tree_edge || seen[w]) continue;
      seen[w] = true;
      via[w] = e;
      q.push(w);
    }
  }
  const double half = 0.5 * lambda;
  for (std::size_t v = to; v != from;) {
    const std::size_t e = via[v];
    const auto& edge = a.edges()[e];
    // Flow travels toward `to`; an edge pointing that way carries +λ/2.
    if (edge.target == v) {
      r.direction[e] = half;
      v = edge.source;
    } else {
      r.direction[e] = -half;
      v = edge.target;
    }
  }
  r.objective = dot(g, r.direction);
  return r;
}

}  // namespace cgc
