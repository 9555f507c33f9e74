#include "cgc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cgc/oracles.hpp"

namespace cgc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Tracks the worst deviation and remembers the first failure.
struct Tally {
  CheckResult result;

  Tally(std::string name, double tolerance) {
    result.name = std::move(name);
    result.tolerance = tolerance;
  }
  void record(double deviation, bool ok, const std::string& what) {
    result.worst = std::max(result.worst, deviation);
    if (!ok && result.passed) {
      result.passed = false;
      result.detail = what;
    }
  }
};

std::string describe(std::size_t trial, double lib, double oracle) {
  std::ostringstream os;
  os.precision(17);
  os << "trial " << trial << ": library " << lib << " vs oracle " << oracle;
  return os.str();
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// 1..max_layers row-vector layers holding d ≤ 6 coordinates in total.
ParamBlock random_block(std::mt19937_64& rng, std::size_t max_dim, bool integer_valued) {
  std::uniform_int_distribution<std::size_t> dim_dist(1, max_dim);
  const std::size_t d = dim_dist(rng);
  std::uniform_int_distribution<std::size_t> layer_dist(1, std::min<std::size_t>(3, d));
  const std::size_t layers = layer_dist(rng);
  std::vector<Shape> shapes(layers, Shape{1, 1});
  for (std::size_t extra = layers; extra < d; ++extra) {
    std::uniform_int_distribution<std::size_t> pick(0, layers - 1);
    ++shapes[pick(rng)].cols;
  }
  ParamBlock g(shapes);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> small(-2, 2);
  for (double& v : g.values()) v = integer_valued ? small(rng) : normal(rng);
  return g;
}

LmoResult mutated_lmo_l1(const ParamBlock& g, double lambda) {
  LmoResult r = lmo_l1(g, lambda);
  for (double& v : r.direction.values()) v = v != 0.0 ? -lambda : 0.0;
  r.objective = dot(g, r.direction);
  return r;
}

double flat_norm(ConstraintKind kind, const ParamBlock& w) {
  switch (kind) {
    case ConstraintKind::L1: return norm1(w.values());
    case ConstraintKind::LInf: return norm_inf(w.values());
    case ConstraintKind::GroupL1Inf: {
      double worst = 0.0;
      for (std::size_t k = 0; k < w.num_layers(); ++k) worst = std::max(worst, norm1(w.layer(k)));
      return worst;
    }
    default: return norm2(w.values());
  }
}

CheckResult check_vertex_kind(ConstraintKind kind, const LmoCheckOptions& options) {
  const auto t0 = Clock::now();
  Tally tally(std::string(to_string(kind)), 1e-12);
  std::mt19937_64 rng(options.seed * 7919 + static_cast<std::uint64_t>(kind) + 1);
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const ParamBlock g = random_block(rng, 6, trial % 10 == 9);
    ConstraintSpec spec;
    spec.kind = kind;
    spec.lambda = log_uniform(rng, 0.1, 10.0);
    LmoResult lib;
    if (kind == ConstraintKind::L1) {
      lib = options.mutation == LmoMutation::L1Sign ? mutated_lmo_l1(g, spec.lambda) : lmo_l1(g, spec.lambda);
    } else if (kind == ConstraintKind::LInf) {
      lib = lmo_linf(g, spec.lambda);
    } else {
      lib = lmo_group_l1_inf(g, spec.lambda);
    }
    const OracleLmo oracle = brute_force_lmo(g, spec);
    const double dev = std::abs(lib.objective - oracle.objective);
    tally.record(dev, dev <= 1e-12, describe(trial, lib.objective, oracle.objective));
    const double consistency = std::abs(lib.objective - dot(g, lib.direction));
    tally.record(consistency, consistency <= 1e-12, "trial " + std::to_string(trial) + ": objective != <g, s>");
    const double excess = flat_norm(kind, lib.direction) - spec.lambda;
    tally.record(std::max(0.0, excess), excess <= 1e-12 * spec.lambda,
                 "trial " + std::to_string(trial) + ": direction outside the ball");
  }
  tally.result.trials = options.trials;
  tally.result.seconds = seconds_since(t0);
  return tally.result;
}

CheckResult check_smooth_kind(ConstraintKind kind, const LmoCheckOptions& options) {
  const auto t0 = Clock::now();
  Tally tally(std::string(to_string(kind)), 1e-12);
  const std::size_t trials = std::min<std::size_t>(options.trials, 200);
  std::mt19937_64 rng(options.seed * 7919 + static_cast<std::uint64_t>(kind) + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> positive(0.2, 3.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t d = 1 + trial % 3;
    std::vector<double> g(d);
    std::vector<double> scale(d, 1.0);
    for (double& v : g) v = normal(rng);
    if (kind == ConstraintKind::PathNorm) {
      for (double& s : scale) s = positive(rng);
    }
    const double lambda = log_uniform(rng, 0.1, 10.0);
    const std::size_t resolution = d == 3 ? 300 : 4000;
    const LmoResult lib = kind == ConstraintKind::PathNorm ? lmo_pathnorm_layer(g, scale, lambda)
                                                           : lmo_frobenius(ParamBlock::vector(g), lambda);
    const OracleLmo oracle = brute_force_lmo_ellipsoid(g, scale, lambda, resolution);
    // The library value must not beat the grid and may trail it by at most the grid's bound.
    const double above = lib.objective - oracle.objective;
    const double below = oracle.objective - oracle.resolution_bound - lib.objective;
    const double slack = 1e-12 * std::max(1.0, std::abs(oracle.objective));
    tally.record(std::max({0.0, above, below}), above <= slack && below <= slack,
                 describe(trial, lib.objective, oracle.objective));
    double scaled = 0.0;
    for (std::size_t i = 0; i < d; ++i) scaled += (scale[i] * lib.direction[i]) * (scale[i] * lib.direction[i]);
    const double excess = std::sqrt(scaled) - lambda;
    tally.record(std::max(0.0, excess), excess <= 1e-12 * lambda,
                 "trial " + std::to_string(trial) + ": direction outside the ellipsoid");
  }
  tally.result.trials = trials;
  tally.result.seconds = seconds_since(t0);
  return tally.result;
}

CheckResult check_nuclear(const LmoCheckOptions& options) {
  const auto t0 = Clock::now();
  Tally tally("NuclearBall", 1e-6);
  std::mt19937_64 rng(options.seed * 7919 + 101);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = options.nuclear_dim;
  for (std::size_t trial = 0; trial < options.nuclear_trials; ++trial) {
    Matrix g(n, n);
    for (double& v : g.data()) v = normal(rng);
    const double lambda = log_uniform(rng, 0.1, 10.0);
    const LmoResult lib = lmo_nuclear(g, lambda, 1e-12, options.seed + trial);
    const double sigma = jacobi_singular_values(g).front();
    const double rel = std::abs(lib.objective + lambda * sigma) / (lambda * sigma);
    tally.record(rel, rel <= 1e-6, describe(trial, lib.objective, -lambda * sigma));

    // A rank-one matrix has every 2×2 minor zero and nuclear norm equal to its Frobenius norm.
    const auto s = lib.direction.values();
    double fro = 0.0;
    for (double v : s) fro += v * v;
    fro = std::sqrt(fro);
    tally.record(0.0, std::abs(fro - lambda) <= 1e-9,
                 "trial " + std::to_string(trial) + ": nuclear norm " + std::to_string(fro) + " != lambda");
    double worst_minor = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t l = j + 1; l < n; ++l) {
            worst_minor = std::max(worst_minor, std::abs(s[i * n + j] * s[k * n + l] - s[i * n + l] * s[k * n + j]));
          }
        }
      }
    }
    tally.record(0.0, worst_minor <= 1e-12 * lambda * lambda,
                 "trial " + std::to_string(trial) + ": direction is not rank one");
  }
  tally.result.trials = options.nuclear_trials;
  tally.result.seconds = seconds_since(t0);
  return tally.result;
}

/// Dense node × edge incidence built straight from the edge list.
Matrix dense_incidence(const IncidenceMatrix& a) {
  Matrix m(a.num_nodes(), a.num_edges());
  for (std::size_t e = 0; e < a.num_edges(); ++e) {
    m(a.edges()[e].source, e) += 1.0;
    m(a.edges()[e].target, e) -= 1.0;
  }
  return m;
}

/// min ‖y'‖∞ s.t. Aᵀy' = g, by LP enumeration; the TV LMO value is −λ times this.
double lp_tv_lmo_bound(const Matrix& a, std::span<const double> g) {
  const std::size_t n = a.rows();
  const std::size_t e_count = a.cols();
  LinearProgram lp(n + 1);
  lp.objective[n] = -1.0;  // maximize −s
  lp.eq_lhs = Matrix(e_count, n + 1);
  lp.eq_rhs.assign(g.begin(), g.end());
  for (std::size_t e = 0; e < e_count; ++e) {
    for (std::size_t v = 0; v < n; ++v) lp.eq_lhs(e, v) = a(v, e);
  }
  lp.ub_lhs = Matrix(2 * n, n + 1);
  lp.ub_rhs.assign(2 * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    lp.ub_lhs(2 * v, v) = 1.0;
    lp.ub_lhs(2 * v, n) = -1.0;
    lp.ub_lhs(2 * v + 1, v) = -1.0;
    lp.ub_lhs(2 * v + 1, n) = -1.0;
  }
  lp.lower[n] = 0.0;
  const LpSolution sol = brute_force_lp(lp);
  if (sol.status != LpStatus::Optimal) throw Error("TV LMO bound LP reported infeasible");
  return -sol.value;
}

/// max β s.t. A·f = β·d, f ∈ [0,1]^E, β ≥ 0, by LP enumeration.
double lp_tv_beta(const Matrix& a, std::span<const double> demand) {
  const std::size_t n = a.rows();
  const std::size_t e_count = a.cols();
  LinearProgram lp(e_count + 1);
  lp.objective[e_count] = 1.0;
  lp.eq_lhs = Matrix(n, e_count + 1);
  lp.eq_rhs.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e = 0; e < e_count; ++e) lp.eq_lhs(v, e) = a(v, e);
    lp.eq_lhs(v, e_count) = -demand[v];
  }
  for (std::size_t e = 0; e < e_count; ++e) {
    lp.lower[e] = 0.0;
    lp.upper[e] = 1.0;
  }
  lp.lower[e_count] = 0.0;
  const LpSolution sol = brute_force_lp(lp);
  if (sol.status != LpStatus::Optimal) throw Error("TV primal LP reported infeasible");
  return sol.value;
}

std::vector<CheckResult> check_tv(const LmoCheckOptions& options) {
  const auto graphs = connected_graphs(5, options.seed);
  std::mt19937_64 rng(options.seed * 7919 + 211);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto t0 = Clock::now();
  Tally lmo("TVBall", 1e-6);
  const std::size_t per_graph = 10;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const IncidenceMatrix& a = graphs[gi];
    const Matrix dense = dense_incidence(a);
    for (std::size_t rep = 0; rep < per_graph; ++rep) {
      std::vector<double> y(a.num_nodes());
      for (double& v : y) v = normal(rng);
      const std::vector<double> g = multiply_transposed(dense, y);
      const double lambda = log_uniform(rng, 0.1, 10.0);
      const LmoResult lib = lmo_tv(ParamBlock::vector(g), a, lambda, 1e-9);
      const double bound = -lambda * lp_tv_lmo_bound(dense, g);
      const double dev = std::abs(lib.objective - bound);
      const std::string where = "graph " + std::to_string(gi) + " rep " + std::to_string(rep);
      lmo.record(dev, dev <= 1e-6, where + ": " + describe(rep, lib.objective, bound));
      const double tv = norm1(multiply(dense, lib.direction.values()));
      lmo.record(0.0, tv <= lambda * (1.0 + 1e-9), where + ": ||A s||_1 = " + std::to_string(tv) + " > lambda");
      ++lmo.result.trials;
    }
  }
  lmo.result.seconds = seconds_since(t0);

  t0 = Clock::now();
  const double eps = 1e-6;
  Tally dual("TV dual vs LP", eps);
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const IncidenceMatrix& a = graphs[gi];
    const Matrix dense = dense_incidence(a);
    const std::size_t n = a.num_nodes();
    std::vector<std::vector<double>> demands;
    std::vector<double> f(a.num_edges());
    for (double& v : f) v = unit(rng);
    demands.push_back(multiply(dense, f));
    std::vector<double> balanced(n);
    for (double& v : balanced) v = normal(rng);
    const double mean = std::accumulate(balanced.begin(), balanced.end(), 0.0) / static_cast<double>(n);
    for (double& v : balanced) v -= mean;
    demands.push_back(balanced);
    std::vector<double> pair(n, 0.0);
    pair[gi % n] = 1.0;
    pair[(gi + 1 + gi / n) % n] -= 1.0;
    if (std::any_of(pair.begin(), pair.end(), [](double v) { return v != 0.0; })) demands.push_back(pair);
    for (std::size_t di = 0; di < demands.size(); ++di) {
      const double lib = tv_dual_solve(demands[di], a, eps).beta;
      const double oracle = lp_tv_beta(dense, demands[di]);
      const double dev = std::abs(lib - oracle);
      dual.record(dev, dev <= eps,
                  "graph " + std::to_string(gi) + " demand " + std::to_string(di) + ": " + describe(di, lib, oracle));
      ++dual.result.trials;
    }
  }
  dual.result.seconds = seconds_since(t0);
  return {lmo.result, dual.result};
}

}  // namespace

std::vector<CheckResult> check_lmo_suite(const LmoCheckOptions& options) {
  std::vector<CheckResult> out;
  auto wanted = [&](ConstraintKind k) { return !options.only || *options.only == k; };
  for (auto kind : {ConstraintKind::L1, ConstraintKind::LInf, ConstraintKind::GroupL1Inf}) {
    if (wanted(kind)) out.push_back(check_vertex_kind(kind, options));
  }
  if (wanted(ConstraintKind::Frobenius)) out.push_back(check_smooth_kind(ConstraintKind::Frobenius, options));
  if (wanted(ConstraintKind::PathNorm)) out.push_back(check_smooth_kind(ConstraintKind::PathNorm, options));
  if (wanted(ConstraintKind::Nuclear)) out.push_back(check_nuclear(options));
  if (wanted(ConstraintKind::TV)) {
    for (auto& r : check_tv(options)) out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckResult> check_pathnorm_suite(const PathNormCheckOptions& options) {
  std::mt19937_64 rng(options.seed * 7919 + 307);
  std::uniform_int_distribution<std::size_t> depth_dist(1, 4);
  std::uniform_int_distribution<std::size_t> width_dist(1, 4);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto t0 = Clock::now();
  Tally dp("path norm DP vs enumeration", 1e-10);
  Tally identity("per-layer gamma identity", 1e-10);
  Tally invariance("rescale_node invariance", 1e-9);
  for (std::size_t trial = 0; trial < options.nets; ++trial) {
    std::vector<std::size_t> sizes(depth_dist(rng) + 1);
    for (auto& s : sizes) s = width_dist(rng);
    const FeedForwardNet net = FeedForwardNet::gaussian(sizes, options.seed * 1000003 + trial);
    const double brute = brute_force_path_norm(net);
    const double fast = path_norm(net);
    const double rel = std::abs(fast * fast - brute) / std::max(brute, 1e-300);
    dp.record(rel, rel <= 1e-10, describe(trial, fast * fast, brute));

    const GammaTable gammas = compute_gammas(net);
    for (std::size_t k = 0; k < net.depth(); ++k) {
      double sum = 0.0;
      const auto w = net.weights().layer(k);
      const auto gamma = gammas.gamma_edge.layer(k);
      for (std::size_t e = 0; e < w.size(); ++e) sum += gamma[e] * w[e] * w[e];
      const double r = std::abs(sum - brute) / std::max(brute, 1e-300);
      identity.record(r, r <= 1e-10, "net " + std::to_string(trial) + " layer " + std::to_string(k));
    }

    if (net.depth() < 2) continue;
    Matrix inputs(options.inputs, sizes.front());
    for (double& v : inputs.data()) v = normal(rng);
    const Matrix before = forward(net, inputs).back();
    std::uniform_int_distribution<std::size_t> layer_dist(1, net.depth() - 1);
    const std::size_t layer = layer_dist(rng);
    std::uniform_int_distribution<std::size_t> node_dist(0, sizes[layer] - 1);
    const std::size_t node = node_dist(rng);
    for (double c : {0.5, 2.0, 10.0}) {
      const FeedForwardNet scaled = rescale_node(net, layer, node, c);
      const Matrix after = forward(scaled, inputs).back();
      double worst = 0.0;
      for (std::size_t i = 0; i < before.size(); ++i) {
        worst = std::max(worst, std::abs(after.data()[i] - before.data()[i]) /
                                    std::max(1.0, std::abs(before.data()[i])));
      }
      const double pn = std::abs(path_norm(scaled) - fast) / std::max(fast, 1e-300);
      invariance.record(std::max(worst, pn), worst <= 1e-9 && pn <= 1e-9,
                        "net " + std::to_string(trial) + " c=" + std::to_string(c));
    }
    ++invariance.result.trials;
  }
  dp.result.trials = options.nets;
  identity.result.trials = options.nets;
  const double elapsed = seconds_since(t0);
  for (auto* t : {&dp, &identity, &invariance}) t->result.seconds = elapsed;
  return {dp.result, identity.result, invariance.result};
}

std::vector<IncidenceMatrix> connected_graphs(std::size_t max_nodes, std::uint64_t seed) {
  if (max_nodes > 6) throw UnsupportedError("connected_graphs: at most 6 nodes");
  std::mt19937_64 rng(seed * 7919 + 401);
  std::bernoulli_distribution flip(0.5);
  std::vector<IncidenceMatrix> graphs;
  for (std::size_t n = 2; n <= max_nodes; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    auto pair_index = [&](std::size_t i, std::size_t j) {
      if (i > j) std::swap(i, j);
      return static_cast<std::size_t>(std::find(pairs.begin(), pairs.end(), std::make_pair(i, j)) - pairs.begin());
    };
    std::set<std::uint32_t> seen;
    for (std::uint32_t mask = 1; mask < (1U << pairs.size()); ++mask) {
      // Connectivity by union-find over the selected pairs.
      std::vector<std::size_t> parent(n);
      std::iota(parent.begin(), parent.end(), std::size_t{0});
      auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
      };
      std::size_t components = n;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!((mask >> p) & 1U)) continue;
        const std::size_t a = find(pairs[p].first);
        const std::size_t b = find(pairs[p].second);
        if (a != b) {
          parent[a] = b;
          --components;
        }
      }
      if (components != 1) continue;

      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::uint32_t canonical = mask;
      do {
        std::uint32_t relabeled = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          if ((mask >> p) & 1U) relabeled |= 1U << pair_index(perm[pairs[p].first], perm[pairs[p].second]);
        }
        canonical = std::min(canonical, relabeled);
      } while (std::next_permutation(perm.begin(), perm.end()));
      if (!seen.insert(canonical).second) continue;

      std::vector<Edge> edges;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (!((canonical >> p) & 1U)) continue;
        edges.push_back(flip(rng) ? Edge{pairs[p].first, pairs[p].second} : Edge{pairs[p].second, pairs[p].first});
      }
      graphs.emplace_back(n, std::move(edges));
    }
  }
  return graphs;
}

GapBenchResult gap_bench(const GapBenchOptions& options) {
  std::vector<IncidenceMatrix> graphs;
  for (auto& g : connected_graphs(options.nodes, options.seed)) {
    if (g.num_nodes() == options.nodes) graphs.push_back(std::move(g));
  }
  std::mt19937_64 rng(options.seed * 7919 + 503);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<std::size_t, std::vector<double>>> instances;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    for (std::size_t r = 0; r < options.demands_per_graph; ++r) {
      std::vector<double> f(graphs[gi].num_edges());
      for (double& v : f) v = unit(rng);
      instances.emplace_back(gi, graphs[gi].apply(f));
    }
  }

  GapBenchResult out;
  out.instances = instances.size();
  if (instances.empty()) return out;
  for (double eps : options.eps) {
    const auto t0 = Clock::now();
    GapBenchRow row;
    row.eps = eps;
    for (const auto& [gi, demand] : instances) {
      const std::size_t it = tv_dual_solve(demand, graphs[gi], eps).iterations;
      row.mean_iterations += static_cast<double>(it);
      row.max_iterations = std::max(row.max_iterations, it);
    }
    row.mean_iterations /= static_cast<double>(instances.size());
    row.seconds = seconds_since(t0);
    out.rows.push_back(row);
  }

  std::vector<GapBenchRow> by_eps = out.rows;
  std::sort(by_eps.begin(), by_eps.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
  for (std::size_t i = 1; i < by_eps.size(); ++i) {
    if (by_eps[i].mean_iterations > by_eps[i - 1].mean_iterations) out.monotone = false;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(out.rows.size());
  for (const auto& row : out.rows) {
    const double x = std::log(1.0 / row.eps);
    const double y = std::log(row.mean_iterations + 1.0);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  out.exponent = denom > 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  return out;
}

}  // namespace cgc
