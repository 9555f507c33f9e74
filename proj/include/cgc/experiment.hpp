#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgc/constraints.hpp"
#include "cgc/data.hpp"
#include "cgc/optim.hpp"

namespace cgc {

enum class OptimizerKind { CG, PathCG, PGD, SGD };

std::string_view to_string(OptimizerKind kind);
/// cg, path_cg, pgd, sgd
std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name);
bool is_constrained(OptimizerKind kind);

struct DatasetConfig {
  std::string kind = "gaussian_blobs";  ///< mnist, gaussian_blobs, two_spirals
  std::filesystem::path path = "data/mnist";
  std::size_t n_train = 1000;  ///< mnist
  std::size_t n_test = 1000;   ///< mnist
  std::size_t n = 500;         ///< synthetic, train + test
  std::size_t classes = 3;
  double separation = 10.0;
  double noise = 0.2;
};

/// Settings for the verification commands.
struct CheckConfig {
  std::size_t trials = 1000;
  std::string inject;  ///< "" or "l1_sign": swap in a mutated l1 LMO
};

struct ExperimentConfig {
  DatasetConfig dataset;
  std::vector<std::size_t> layers;  ///< empty: [input dim, classes]
  OptimizerKind optimizer = OptimizerKind::CG;
  std::optional<ConstraintKind> constraint_kind;
  double lambda = 1.0;
  double eps = 1e-6;
  double tol = 1e-12;
  std::string incidence;  ///< "network" or ""
  std::size_t iterations = 0;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;
  std::size_t eval_every = 0;
  ScheduleMode schedule_mode = ScheduleMode::BurnInThenDecay;
  double eta0 = 0.9;
  std::optional<std::size_t> burn_in;  ///< default: one epoch, ⌈N/B⌉ iterations
  std::uint64_t seed = 0;
  std::filesystem::path out = "runs/default";
  CheckConfig check;
};

/// Loads or generates the configured dataset.
Dataset make_dataset(const ExperimentConfig& config);

/// ConstraintSpec for the config; TV incidence is built from `layers`.
ConstraintSpec make_constraint(const ExperimentConfig& config, const std::vector<std::size_t>& layers);

struct ExperimentOutput {
  std::filesystem::path csv;
  std::filesystem::path summary;
  TrainResult result;
  double final_train_err = 0.0;  ///< full training set
  double final_test_err = 0.0;
  double final_constraint_value = 0.0;
  double total_wall_ms = 0.0;
};

/// Builds dataset and net, trains, and writes `metrics.csv`, `summary.json` and
/// `net.txt` into config.out. Module errors are rethrown with the config
/// context prefixed, keeping ConfigError distinguishable.
ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace cgc
