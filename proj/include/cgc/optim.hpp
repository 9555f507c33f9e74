#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgc/constraints.hpp"
#include "cgc/network.hpp"

namespace cgc {

enum class ScheduleMode { Constant, BurnInThenDecay };

/// η_t is the weight kept on the current iterate; 1 − η_t goes to the LMO vertex.
///
/// Constant: η_t = eta0. BurnInThenDecay: η_t = eta0 while t < burn_in_iters,
/// afterwards the vertex weight decays as (1 − eta0)·burn_in_iters / t.
struct StepSchedule {
  ScheduleMode mode = ScheduleMode::BurnInThenDecay;
  double eta0 = 0.9;
  std::size_t burn_in_iters = 1;

  void validate() const;
};

double step_schedule(std::size_t t, const StepSchedule& schedule);

/// η·W + (1 − η)·s. η is clamped into [1e-12, 1 − 1e-12]; `clamped` reports it.
ParamBlock cg_step(const ParamBlock& w, const ParamBlock& s, double eta, bool* clamped = nullptr);
ParamBlock sgd_step(const ParamBlock& w, const ParamBlock& g, double eta);
/// project(W − η·g) for kinds that have a projection; UnsupportedError otherwise.
ParamBlock pgd_step(const ParamBlock& w, const ParamBlock& g, double eta, const ConstraintSpec& spec);
/// ⟨g, W − s⟩, clamped at 0.
double fw_gap(const ParamBlock& g, const ParamBlock& w, const ParamBlock& s);

struct RunRecord {
  std::size_t iter = 0;
  double loss = 0.0;       ///< minibatch loss at W_t
  double train_err = 0.0;  ///< minibatch error at W_t
  std::optional<double> test_err;  ///< at W_{t+1}, on evaluation iterations only
  double constraint_value = 0.0;   ///< R(W_{t+1})
  double eta = 0.0;
  double wall_ms = 0.0;
  double fw_gap = 0.0;  ///< CG family only; not written to CSV
};

struct RunMetrics {
  std::vector<RunRecord> records;
  std::size_t dead_path_coordinates = 0;
  std::size_t clamped_steps = 0;
  std::size_t degenerate_steps = 0;
  std::vector<std::string> warnings;
};

/// Header: iter,loss,train_err,test_err,constraint_value,eta,wall_ms
void write_csv(std::ostream& out, const RunMetrics& metrics);

struct TrainOptions {
  std::size_t iterations = 0;  ///< T
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Evaluate test error every this many iterations (and after the last); 0 = last only.
  std::size_t eval_every = 0;
  /// Called with (t, net) before iteration t; may modify the net.
  std::function<void(std::size_t, FeedForwardNet&)> before_iteration;
};

struct TrainResult {
  FeedForwardNet net;
  RunMetrics metrics;
};

/// Deterministic minibatch order: a seeded reshuffle per epoch, last short batch kept.
class BatchSampler {
 public:
  BatchSampler(std::size_t num_samples, std::size_t batch_size, std::uint64_t seed);
  std::vector<std::size_t> next();
  std::size_t batches_per_epoch() const;

 private:
  void reshuffle();

  std::size_t num_samples_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> order_;
};

/// Conditional gradient over the ball of `spec`. The starting net must be feasible.
TrainResult train_cg(const FeedForwardNet& net, const Batch& train, const Batch& test, const ConstraintSpec& spec,
                     const StepSchedule& schedule, const TrainOptions& options);

/// Layer-wise conditional gradient over the path-norm ball ‖W‖_π ≤ λ.
///
/// One backpropagation per iteration; the layers are then visited input side
/// first, each time recomputing the γ table from the current weights, solving
/// the rescaled Frobenius LMO for that layer and taking the convex step.
TrainResult path_cg(const FeedForwardNet& net, const Batch& train, const Batch& test, double lambda,
                    const StepSchedule& schedule, const TrainOptions& options);

/// Projected SGD with a fixed learning rate.
TrainResult train_pgd(const FeedForwardNet& net, const Batch& train, const Batch& test, const ConstraintSpec& spec,
                      double learning_rate, const TrainOptions& options);

/// Plain SGD; logs R(W_t) of `monitor` (path norm by default) so it can be compared with CG runs.
TrainResult train_sgd(const FeedForwardNet& net, const Batch& train, const Batch& test, double learning_rate,
                      const TrainOptions& options,
                      const ConstraintSpec& monitor = ConstraintSpec{ConstraintKind::PathNorm, 1.0, 1e-6, 1e-12, 0, std::nullopt});

/// Scale all weights uniformly so that R(W) ≤ λ/2 (no-op when already there).
/// For PathNorm every layer is scaled by (λ / (2‖W‖_π))^{1/l}, unconditionally.
FeedForwardNet feasible_start(const FeedForwardNet& net, const ConstraintSpec& spec);

}  // namespace cgc
