#include "cgc/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace cgc {

namespace {

struct KindName {
  ConstraintKind kind;
  std::string_view canonical;
  std::string_view short_name;
};

constexpr KindName kKindNames[] = {
    {ConstraintKind::Frobenius, "FrobeniusBall", "frobenius"},
    {ConstraintKind::Nuclear, "NuclearBall", "nuclear"},
    {ConstraintKind::L1, "L1Ball", "l1"},
    {ConstraintKind::LInf, "LInfBall", "linf"},
    {ConstraintKind::GroupL1Inf, "GroupL1InfBall", "group"},
    {ConstraintKind::TV, "TVBall", "tv"},
    {ConstraintKind::PathNorm, "PathNormBall", "pathnorm"},
};

double sign(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Lowest index attaining max |x_j|.
std::size_t argmax_abs(std::span<const double> x) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (std::abs(x[j]) > std::abs(x[best])) best = j;
  }
  return best;
}

LmoResult finish(const ParamBlock& g, ParamBlock direction) {
  LmoResult r;
  r.objective = dot(g, direction);
  r.direction = std::move(direction);
  return r;
}

LmoResult degenerate_result(const ParamBlock& g) {
  LmoResult r;
  r.direction = g.zeros_like();
  r.degenerate = true;
  return r;
}

}  // namespace

std::string_view to_string(ConstraintKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.canonical;
  }
  return "unknown";
}

std::optional<ConstraintKind> parse_constraint_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (name == k.canonical || name == k.short_name) return k.kind;
  }
  return std::nullopt;
}

void ConstraintSpec::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("constraint.lambda must be a positive number");
  if (!(eps > 0.0)) throw ConfigError("constraint.eps must be positive");
  if (!(tol > 0.0)) throw ConfigError("constraint.tol must be positive");
  if (kind == ConstraintKind::TV && !incidence) {
    throw ConfigError("constraint.kind=TVBall needs an incidence matrix (set constraint.incidence=network)");
  }
  if (kind != ConstraintKind::TV && incidence) {
    throw ConfigError("constraint.incidence is only meaningful for TVBall");
  }
}

LmoResult lmo_frobenius(const ParamBlock& g, double lambda) {
  const double n = norm2(g.values());
  if (n == 0.0) return degenerate_result(g);
  ParamBlock s = g.zeros_like();
  for (std::size_t i = 0; i < g.size(); ++i) s[i] = -lambda * g[i] / n;
  return finish(g, std::move(s));
}

ParamBlock project_frobenius(const ParamBlock& z, double lambda) {
  const double n = norm2(z.values());
  if (n <= lambda) return z;
  ParamBlock p = z;
  for (double& v : p.values()) v *= lambda / n;
  return p;
}

LmoResult lmo_nuclear(const Matrix& g, double lambda, double tol, std::uint64_t seed, std::size_t max_iter) {
  const ParamBlock gb = ParamBlock::from_matrices(std::span(&g, 1));
  if (norm_inf(g.data()) == 0.0) return degenerate_result(gb);
  const SingularTriple top = power_method(g, tol, max_iter, seed);
  ParamBlock s = gb.zeros_like();
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) s(0, r, c) = -lambda * top.u[r] * top.v[c];
  return finish(gb, std::move(s));
}

LmoResult lmo_nuclear(const ParamBlock& g, double lambda, double tol, std::uint64_t seed) {
  std::size_t best_layer = g.num_layers();
  SingularTriple best;
  for (std::size_t k = 0; k < g.num_layers(); ++k) {
    const Matrix m = g.layer_matrix(k);
    if (norm_inf(m.data()) == 0.0) continue;
    SingularTriple t = power_method(m, tol, 200000, seed + k);
    if (best_layer == g.num_layers() || t.sigma > best.sigma) {
      best = std::move(t);
      best_layer = k;
    }
  }
  if (best_layer == g.num_layers()) return degenerate_result(g);
  ParamBlock s = g.zeros_like();
  const Shape shape = g.shape(best_layer);
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c) s(best_layer, r, c) = -lambda * best.u[r] * best.v[c];
  return finish(g, std::move(s));
}

LmoResult lmo_l1(const ParamBlock& g, double lambda) {
  if (g.size() == 0 || norm_inf(g.values()) == 0.0) return degenerate_result(g);
  const std::size_t j = argmax_abs(g.values());
  ParamBlock s = g.zeros_like();
  s[j] = -lambda * sign(g[j]);
  return finish(g, std::move(s));
}

ParamBlock project_l1(const ParamBlock& z, double lambda) {
  if (norm1(z.values()) <= lambda) return z;
  std::vector<double> mags(z.size());
  std::transform(z.values().begin(), z.values().end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - lambda) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  ParamBlock p = z;
  for (double& v : p.values()) v = sign(v) * std::max(std::abs(v) - theta, 0.0);
  return p;
}

LmoResult lmo_linf(const ParamBlock& g, double lambda) {
  ParamBlock s = g.zeros_like();
  for (std::size_t j = 0; j < g.size(); ++j) s[j] = g[j] < 0.0 ? lambda : -lambda;
  return finish(g, std::move(s));
}

ParamBlock project_linf(const ParamBlock& z, double lambda) {
  ParamBlock p = z;
  for (double& v : p.values()) v = std::clamp(v, -lambda, lambda);
  return p;
}

LmoResult lmo_group_l1_inf(const ParamBlock& g, double lambda) {
  ParamBlock s = g.zeros_like();
  bool any = false;
  for (std::size_t k = 0; k < g.num_layers(); ++k) {
    const auto layer = g.layer(k);
    if (layer.empty() || norm_inf(layer) == 0.0) continue;
    const std::size_t j = argmax_abs(layer);
    s.layer(k)[j] = -lambda * sign(layer[j]);
    any = true;
  }
  if (!any) return degenerate_result(g);
  return finish(g, std::move(s));
}

double group_l1_inf_norm(const ParamBlock& w) {
  double m = 0.0;
  for (std::size_t k = 0; k < w.num_layers(); ++k) m = std::max(m, norm1(w.layer(k)));
  return m;
}

LmoResult lmo_pathnorm_layer(std::span<const double> g, std::span<const double> scale, double lambda) {
  if (g.size() != scale.size()) throw DimensionError("lmo_pathnorm_layer: gradient and scaling differ in length");
  LmoResult r;
  std::vector<double> scaled(g.size(), 0.0);
  for (std::size_t e = 0; e < g.size(); ++e) {
    if (scale[e] > 0.0) {
      scaled[e] = g[e] / scale[e];
    } else if (g[e] != 0.0) {
      ++r.dead_coordinates;
    }
  }
  const double n = norm2(scaled);
  std::vector<double> s(g.size(), 0.0);
  if (n == 0.0) {
    r.degenerate = true;
  } else {
    for (std::size_t e = 0; e < g.size(); ++e) {
      if (scaled[e] == 0.0) continue;
      const double v = -lambda * (scaled[e] / n) / scale[e];
      if (std::isfinite(v)) {
        s[e] = v;
      } else {
        ++r.dead_coordinates;
      }
    }
  }
  r.direction = ParamBlock::vector(std::move(s));
  r.objective = dot(g, r.direction.values());
  return r;
}

double constraint_value(const ConstraintSpec& spec, const FeedForwardNet& net) {
  const ParamBlock& w = net.weights();
  switch (spec.kind) {
    case ConstraintKind::Frobenius:
      return norm2(w.values());
    case ConstraintKind::Nuclear: {
      double total = 0.0;
      for (std::size_t k = 0; k < w.num_layers(); ++k) total += nuclear_norm(w.layer_matrix(k));
      return total;
    }
    case ConstraintKind::L1:
      return norm1(w.values());
    case ConstraintKind::LInf:
      return norm_inf(w.values());
    case ConstraintKind::GroupL1Inf:
      return group_l1_inf_norm(w);
    case ConstraintKind::TV:
      if (!spec.incidence) throw ConfigError("TV constraint value needs an incidence matrix");
      return tv_norm(w.values(), *spec.incidence);
    case ConstraintKind::PathNorm:
      return path_norm(net);
  }
  return 0.0;
}

LmoResult linear_minimization(const ConstraintSpec& spec, const ParamBlock& g) {
  switch (spec.kind) {
    case ConstraintKind::Frobenius:
      return lmo_frobenius(g, spec.lambda);
    case ConstraintKind::Nuclear:
      return lmo_nuclear(g, spec.lambda, spec.tol, spec.seed);
    case ConstraintKind::L1:
      return lmo_l1(g, spec.lambda);
    case ConstraintKind::LInf:
      return lmo_linf(g, spec.lambda);
    case ConstraintKind::GroupL1Inf:
      return lmo_group_l1_inf(g, spec.lambda);
    case ConstraintKind::TV: {
      if (!spec.incidence) throw ConfigError("TV LMO needs an incidence matrix");
      ParamBlock projected = g;
      const auto p = project_row_space(g.values(), *spec.incidence);
      std::copy(p.begin(), p.end(), projected.values().begin());
      LmoResult r = lmo_tv(projected, *spec.incidence, spec.lambda, spec.eps);
      r.objective = dot(g, r.direction);
      return r;
    }
    case ConstraintKind::PathNorm:
      throw UnsupportedError(
          "the path-norm ball is unbounded jointly over all layers; use path_cg, which solves one layer at a time");
  }
  throw UnsupportedError("unknown constraint kind");
}

bool has_projection(ConstraintKind kind) {
  return kind == ConstraintKind::Frobenius || kind == ConstraintKind::L1 || kind == ConstraintKind::LInf;
}

ParamBlock project(const ConstraintSpec& spec, const ParamBlock& z) {
  switch (spec.kind) {
    case ConstraintKind::Frobenius:
      return project_frobenius(z, spec.lambda);
    case ConstraintKind::L1:
      return project_l1(z, spec.lambda);
    case ConstraintKind::LInf:
      return project_linf(z, spec.lambda);
    case ConstraintKind::Nuclear:
      throw UnsupportedError("no projection onto the nuclear ball: it needs a full SVD per step; use CG");
    case ConstraintKind::TV:
      throw UnsupportedError("no projection onto the TV ball: it is not a simple operator on networks; use CG");
    case ConstraintKind::PathNorm:
      throw UnsupportedError("no projection onto the path-norm ball: no efficient separation oracle; use path_cg");
    case ConstraintKind::GroupL1Inf:
      throw UnsupportedError("no projection onto the group l1/linf ball is implemented; use CG");
  }
  throw UnsupportedError("unknown constraint kind");
}

}  // namespace cgc
