#include "cgc/experiment.hpp"

#include <chrono>
#include <fstream>
#include <json.hpp>

namespace cgc {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::CG: return "cg";
    case OptimizerKind::PathCG: return "path_cg";
    case OptimizerKind::PGD: return "pgd";
    case OptimizerKind::SGD: return "sgd";
  }
  return "?";
}

std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name) {
  for (auto kind : {OptimizerKind::CG, OptimizerKind::PathCG, OptimizerKind::PGD, OptimizerKind::SGD}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

bool is_constrained(OptimizerKind kind) { return kind != OptimizerKind::SGD; }

Dataset make_dataset(const ExperimentConfig& config) {
  const DatasetConfig& d = config.dataset;
  if (d.kind == "mnist") return mnist_subset(d.path, d.n_train, d.n_test, config.seed);
  SyntheticSpec spec;
  if (d.kind == "gaussian_blobs") {
    spec.kind = SyntheticKind::GaussianBlobs;
  } else if (d.kind == "two_spirals") {
    spec.kind = SyntheticKind::TwoSpirals;
  } else {
    throw ConfigError("dataset.kind: unknown dataset '" + d.kind + "' (mnist, gaussian_blobs, two_spirals)");
  }
  spec.n = d.n;
  spec.seed = config.seed;
  spec.classes = d.classes;
  spec.separation = d.separation;
  spec.noise = d.noise;
  return synthetic_dataset(spec);
}

ConstraintSpec make_constraint(const ExperimentConfig& config, const std::vector<std::size_t>& layers) {
  ConstraintSpec spec;
  spec.kind = config.constraint_kind.value_or(ConstraintKind::PathNorm);
  spec.lambda = config.lambda;
  spec.eps = config.eps;
  spec.tol = config.tol;
  spec.seed = config.seed;
  if (spec.kind == ConstraintKind::TV) {
    if (config.incidence != "network") {
      throw ConfigError("constraint.kind=TVBall requires constraint.incidence (only 'network' is supported)");
    }
    spec.incidence = incidence_matrix(FeedForwardNet(layers));
  }
  spec.validate();
  return spec;
}

namespace {

ExperimentOutput run(const ExperimentConfig& config) {
  const Dataset data = make_dataset(config);
  std::vector<std::size_t> layers = config.layers;
  if (layers.empty()) layers = {data.train.dim(), data.num_classes()};
  if (layers.size() < 2) throw ConfigError("net.layers needs at least an input and an output size");
  if (layers.front() != data.train.dim()) {
    throw ConfigError("net.layers: input size " + std::to_string(layers.front()) + " but the dataset has " +
                      std::to_string(data.train.dim()) + " features");
  }
  if (layers.back() < data.num_classes()) {
    throw ConfigError("net.layers: output size " + std::to_string(layers.back()) + " but the dataset has " +
                      std::to_string(data.num_classes()) + " classes");
  }
  if (is_constrained(config.optimizer) && !config.constraint_kind) {
    throw ConfigError("constraint.kind is required for optimizer " + std::string(to_string(config.optimizer)));
  }
  if (config.optimizer == OptimizerKind::PathCG && config.constraint_kind != ConstraintKind::PathNorm) {
    throw ConfigError("optim.kind=path_cg needs constraint.kind=PathNormBall");
  }

  FeedForwardNet net = FeedForwardNet::gaussian(layers, config.seed);
  ConstraintSpec spec = make_constraint(config, layers);

  TrainOptions options;
  options.iterations = config.iterations;
  options.batch_size = config.batch_size;
  options.seed = config.seed;
  options.eval_every = config.eval_every;

  StepSchedule schedule;
  schedule.mode = config.schedule_mode;
  schedule.eta0 = config.eta0;
  schedule.burn_in_iters = config.burn_in.value_or((data.train.size() + config.batch_size - 1) / config.batch_size);

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  switch (config.optimizer) {
    case OptimizerKind::CG:
    case OptimizerKind::PathCG:
      result = train_cg(feasible_start(net, spec), data.train, data.test, spec, schedule, options);
      break;
    case OptimizerKind::PGD:
      net.weights() = project(spec, net.weights());
      result = train_pgd(net, data.train, data.test, spec, config.learning_rate, options);
      break;
    case OptimizerKind::SGD:
      result = train_sgd(net, data.train, data.test, config.learning_rate, options, spec);
      break;
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  ExperimentOutput out;
  out.final_train_err = error_rate(result.net, data.train);
  out.final_test_err = error_rate(result.net, data.test);
  out.final_constraint_value = constraint_value(spec, result.net);
  out.total_wall_ms = wall_ms;

  std::filesystem::create_directories(config.out);
  out.csv = config.out / "metrics.csv";
  out.summary = config.out / "summary.json";
  {
    std::ofstream csv(out.csv);
    if (!csv) throw Error("cannot write " + out.csv.string());
    write_csv(csv, result.metrics);
  }
  save_network(config.out / "net.txt", result.net);

  nlohmann::ordered_json summary;
  summary["final_train_err"] = out.final_train_err;
  summary["final_test_err"] = out.final_test_err;
  summary["final_constraint_value"] = out.final_constraint_value;
  summary["total_wall_ms"] = out.total_wall_ms;
  summary["dataset"] = data.name;
  summary["optimizer"] = std::string(to_string(config.optimizer));
  summary["constraint"] = std::string(to_string(spec.kind));
  summary["lambda"] = spec.lambda;
  summary["iterations"] = config.iterations;
  summary["seed"] = config.seed;
  summary["dead_path_coordinates"] = result.metrics.dead_path_coordinates;
  summary["clamped_steps"] = result.metrics.clamped_steps;
  summary["degenerate_steps"] = result.metrics.degenerate_steps;
  {
    std::ofstream js(out.summary);
    if (!js) throw Error("cannot write " + out.summary.string());
    js << summary.dump(2) << "\n";
  }
  out.result = std::move(result);
  return out;
}

template <class E>
[[noreturn]] void annotate(const std::string& context, const E& e) {
  throw E(context + e.what());
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  const std::string context = "experiment '" + config.out.string() + "' (" + config.dataset.kind + ", " +
                              std::string(to_string(config.optimizer)) + "): ";
  try {
    return run(config);
  } catch (const ConfigError& e) {
    annotate(context, e);
  } catch (const DimensionError& e) {
    annotate(context, e);
  } catch (const DegenerateInputError& e) {
    annotate(context, e);
  } catch (const UnboundedError& e) {
    annotate(context, e);
  } catch (const InfeasibleError& e) {
    annotate(context, e);
  } catch (const UnsupportedError& e) {
    annotate(context, e);
  } catch (const ParseError& e) {
    annotate(context, e);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(context + e.what(), e.best());
  } catch (const Error& e) {
    annotate(context, e);
  }
}

}  // namespace cgc
