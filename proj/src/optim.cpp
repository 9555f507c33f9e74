#include "cgc/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

namespace cgc {

void StepSchedule::validate() const {
  if (!(eta0 > 0.0 && eta0 < 1.0)) throw ConfigError("schedule.eta0 must lie in (0, 1)");
  if (mode == ScheduleMode::BurnInThenDecay && burn_in_iters == 0) {
    throw ConfigError("schedule.burn_in must be at least 1 iteration for burn_in_then_decay");
  }
}

double step_schedule(std::size_t t, const StepSchedule& schedule) {
  if (schedule.mode == ScheduleMode::Constant || t < schedule.burn_in_iters) return schedule.eta0;
  const double vertex_weight =
      (1.0 - schedule.eta0) * static_cast<double>(schedule.burn_in_iters) / static_cast<double>(t);
  return 1.0 - vertex_weight;
}

ParamBlock cg_step(const ParamBlock& w, const ParamBlock& s, double eta, bool* clamped) {
  if (!w.same_shape(s)) throw DimensionError("cg_step: iterate and vertex differ in shape");
  constexpr double kMargin = 1e-12;
  const double e = std::clamp(eta, kMargin, 1.0 - kMargin);
  if (clamped) *clamped = e != eta;
  ParamBlock out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = e * w[i] + (1.0 - e) * s[i];
  return out;
}

ParamBlock sgd_step(const ParamBlock& w, const ParamBlock& g, double eta) {
  if (!w.same_shape(g)) throw DimensionError("sgd_step: iterate and gradient differ in shape");
  ParamBlock out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= eta * g[i];
  return out;
}

ParamBlock pgd_step(const ParamBlock& w, const ParamBlock& g, double eta, const ConstraintSpec& spec) {
  return project(spec, sgd_step(w, g, eta));
}

double fw_gap(const ParamBlock& g, const ParamBlock& w, const ParamBlock& s) {
  return std::max(0.0, dot(g, w) - dot(g, s));
}

void write_csv(std::ostream& out, const RunMetrics& metrics) {
  out << "iter,loss,train_err,test_err,constraint_value,eta,wall_ms\n";
  char buf[256];
  for (const auto& r : metrics.records) {
    char test[32] = "";
    if (r.test_err) std::snprintf(test, sizeof test, "%.6f", *r.test_err);
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.6f,%s,%.12g,%.12g,%.3f\n", r.iter, r.loss, r.train_err, test,
                  r.constraint_value, r.eta, r.wall_ms);
    out << buf;
  }
}

BatchSampler::BatchSampler(std::size_t num_samples, std::size_t batch_size, std::uint64_t seed)
    : num_samples_(num_samples), batch_size_(batch_size), seed_(seed), order_(num_samples) {
  if (num_samples == 0) throw DegenerateInputError("BatchSampler: empty training set");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  reshuffle();
}

void BatchSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ULL * (epoch_ + 1)));
  std::shuffle(order_.begin(), order_.end(), rng);
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
  if (cursor_ >= num_samples_) {
    ++epoch_;
    reshuffle();
  }
  const std::size_t end = std::min(cursor_ + batch_size_, num_samples_);
  std::vector<std::size_t> batch(order_.begin() + cursor_, order_.begin() + end);
  cursor_ = end;
  return batch;
}

std::size_t BatchSampler::batches_per_epoch() const { return (num_samples_ + batch_size_ - 1) / batch_size_; }

namespace {

struct StepOutcome {
  double eta = 0.0;
  double gap = 0.0;
};

/// Shared minibatch loop. `step` updates the net in place from the minibatch gradient.
template <class Step, class Value>
TrainResult run_loop(const FeedForwardNet& start, const Batch& train, const Batch& test, const TrainOptions& options,
                     Value constraint_value_of, Step step) {
  TrainResult result{start, {}};
  if (options.iterations == 0) return result;
  BatchSampler sampler(train.size(), options.batch_size, options.seed);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t t = 0; t < options.iterations; ++t) {
    if (options.before_iteration) options.before_iteration(t, result.net);
    const auto rows = sampler.next();
    const Batch batch = train.subset(rows);
    const LossGradient lg = loss_and_gradient(result.net, batch);

    RunRecord rec;
    rec.iter = t;
    rec.loss = lg.loss;
    rec.train_err = lg.error_rate;
    const StepOutcome outcome = step(t, result.net, lg.grad, result.metrics);
    rec.eta = outcome.eta;
    rec.fw_gap = outcome.gap;
    rec.constraint_value = constraint_value_of(result.net);
    const bool last = t + 1 == options.iterations;
    if (test.size() > 0 && (last || (options.eval_every > 0 && (t + 1) % options.eval_every == 0))) {
      rec.test_err = error_rate(result.net, test);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.records.push_back(rec);
  }
  return result;
}

void require_feasible(double value, double lambda, std::string_view what) {
  if (value > lambda * (1.0 + 1e-8)) {
    throw InfeasibleError(std::string(what) + ": initial net has R(W0) = " + std::to_string(value) +
                          " > lambda = " + std::to_string(lambda) +
                          "; rescale the initialization into the ball (see feasible_start)");
  }
}

}  // namespace

TrainResult train_cg(const FeedForwardNet& net, const Batch& train, const Batch& test, const ConstraintSpec& spec,
                     const StepSchedule& schedule, const TrainOptions& options) {
  spec.validate();
  schedule.validate();
  if (spec.kind == ConstraintKind::PathNorm) return path_cg(net, train, test, spec.lambda, schedule, options);
  require_feasible(constraint_value(spec, net), spec.lambda, "train_cg");

  auto value = [&](const FeedForwardNet& n) { return constraint_value(spec, n); };
  auto step = [&](std::size_t t, FeedForwardNet& n, const ParamBlock& g, RunMetrics& m) {
    ConstraintSpec seeded = spec;
    seeded.seed = spec.seed + t;
    const LmoResult lmo = linear_minimization(seeded, g);
    if (lmo.degenerate) ++m.degenerate_steps;
    const double eta = step_schedule(t, schedule);
    const double gap = fw_gap(g, n.weights(), lmo.direction);
    bool clamped = false;
    n.weights() = cg_step(n.weights(), lmo.direction, eta, &clamped);
    if (clamped) {
      ++m.clamped_steps;
      m.warnings.push_back("iteration " + std::to_string(t) + ": eta clamped into (0,1)");
    }
    return StepOutcome{eta, gap};
  };
  return run_loop(net, train, test, options, value, step);
}

TrainResult path_cg(const FeedForwardNet& net, const Batch& train, const Batch& test, double lambda,
                    const StepSchedule& schedule, const TrainOptions& options) {
  if (!(lambda > 0.0)) throw ConfigError("path_cg: lambda must be positive");
  schedule.validate();
  require_feasible(path_norm(net), lambda, "path_cg");

  auto value = [](const FeedForwardNet& n) { return path_norm(n); };
  auto step = [&](std::size_t t, FeedForwardNet& n, const ParamBlock& g, RunMetrics& m) {
    const double eta = step_schedule(t, schedule);
    double gap = 0.0;
    std::size_t dead = 0;
    for (std::size_t k = 0; k < n.depth(); ++k) {
      const GammaTable gammas = compute_gammas(n);
      const auto scale = gammas.path_scaling(k);
      const LmoResult lmo = lmo_pathnorm_layer(g.layer(k), scale, lambda);
      dead += lmo.dead_coordinates;
      if (lmo.degenerate) ++m.degenerate_steps;
      auto w = n.weights().layer(k);
      const auto s = lmo.direction.values();
      gap += dot(g.layer(k), w) - lmo.objective;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = eta * w[i] + (1.0 - eta) * s[i];
    }
    if (dead > 0) {
      m.dead_path_coordinates += dead;
      m.warnings.push_back("iteration " + std::to_string(t) + ": " + std::to_string(dead) +
                           " dead-path coordinates left unchanged");
    }
    return StepOutcome{eta, std::max(0.0, gap)};
  };
  return run_loop(net, train, test, options, value, step);
}

TrainResult train_pgd(const FeedForwardNet& net, const Batch& train, const Batch& test, const ConstraintSpec& spec,
                      double learning_rate, const TrainOptions& options) {
  spec.validate();
  if (!has_projection(spec.kind)) {
    // Surface the reason before any work is done.
    (void)project(spec, net.weights());
  }
  auto value = [&](const FeedForwardNet& n) { return constraint_value(spec, n); };
  auto step = [&](std::size_t, FeedForwardNet& n, const ParamBlock& g, RunMetrics&) {
    n.weights() = pgd_step(n.weights(), g, learning_rate, spec);
    return StepOutcome{learning_rate, 0.0};
  };
  return run_loop(net, train, test, options, value, step);
}

TrainResult train_sgd(const FeedForwardNet& net, const Batch& train, const Batch& test, double learning_rate,
                      const TrainOptions& options, const ConstraintSpec& monitor) {
  auto value = [&](const FeedForwardNet& n) { return constraint_value(monitor, n); };
  auto step = [&](std::size_t, FeedForwardNet& n, const ParamBlock& g, RunMetrics&) {
    n.weights() = sgd_step(n.weights(), g, learning_rate);
    return StepOutcome{learning_rate, 0.0};
  };
  return run_loop(net, train, test, options, value, step);
}

FeedForwardNet feasible_start(const FeedForwardNet& net, const ConstraintSpec& spec) {
  FeedForwardNet out = net;
  const double value = constraint_value(spec, net);
  if (value == 0.0) return out;
  if (spec.kind == ConstraintKind::PathNorm) {
    const double factor = std::pow(spec.lambda / (2.0 * value), 1.0 / static_cast<double>(net.depth()));
    for (double& w : out.weights().values()) w *= factor;
    return out;
  }
  if (value <= 0.5 * spec.lambda) return out;
  const double factor = 0.5 * spec.lambda / value;
  for (double& w : out.weights().values()) w *= factor;
  return out;
}

}  // namespace cgc
