#include "cgc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace cgc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::size_t to_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of sizes");
  return out;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "dataset.kind") c.dataset.kind = v;
  else if (key == "dataset.path") c.dataset.path = v;
  else if (key == "dataset.n_train") c.dataset.n_train = to_size(key, v);
  else if (key == "dataset.n_test") c.dataset.n_test = to_size(key, v);
  else if (key == "dataset.n") c.dataset.n = to_size(key, v);
  else if (key == "dataset.classes") c.dataset.classes = to_size(key, v);
  else if (key == "dataset.separation") c.dataset.separation = to_double(key, v);
  else if (key == "dataset.noise") c.dataset.noise = to_double(key, v);
  else if (key == "net.layers") c.layers = to_sizes(key, v);
  else if (key == "constraint.kind") {
    const auto kind = parse_constraint_kind(v);
    if (!kind) {
      throw ConfigError(key + ": unknown constraint '" + v +
                        "' (FrobeniusBall, NuclearBall, L1Ball, LInfBall, GroupL1InfBall, TVBall, PathNormBall)");
    }
    c.constraint_kind = kind;
  } else if (key == "constraint.lambda") c.lambda = to_double(key, v);
  else if (key == "constraint.eps") c.eps = to_double(key, v);
  else if (key == "constraint.tol") c.tol = to_double(key, v);
  else if (key == "constraint.incidence") {
    if (v != "network") throw ConfigError(key + ": only 'network' is supported, got '" + v + "'");
    c.incidence = v;
  } else if (key == "optim.kind") {
    const auto kind = parse_optimizer_kind(v);
    if (!kind) throw ConfigError(key + ": unknown optimizer '" + v + "' (cg, path_cg, pgd, sgd)");
    c.optimizer = *kind;
  } else if (key == "optim.iters") c.iterations = to_size(key, v);
  else if (key == "optim.batch") c.batch_size = to_size(key, v);
  else if (key == "optim.lr") c.learning_rate = to_double(key, v);
  else if (key == "optim.eval_every") c.eval_every = to_size(key, v);
  else if (key == "schedule.mode") {
    if (v == "constant") c.schedule_mode = ScheduleMode::Constant;
    else if (v == "burn_in_then_decay") c.schedule_mode = ScheduleMode::BurnInThenDecay;
    else throw ConfigError(key + ": expected constant or burn_in_then_decay, got '" + v + "'");
  } else if (key == "schedule.eta0") c.eta0 = to_double(key, v);
  else if (key == "schedule.burn_in") c.burn_in = to_size(key, v);
  else if (key == "seed") c.seed = to_size(key, v);
  else if (key == "out") c.out = v;
  else if (key == "check.trials") c.check.trials = to_size(key, v);
  else if (key == "check.inject") {
    if (v != "none" && v != "l1_sign") throw ConfigError(key + ": expected none or l1_sign, got '" + v + "'");
    c.check.inject = v == "none" ? "" : v;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::pair<std::string, std::string> split_assignment(std::string_view line, std::string_view where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(where) + ": expected 'key = value', got '" + trim(line) + "'");
  }
  std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError(std::string(where) + ": empty key");
  return {std::move(key), trim(line.substr(eq + 1))};
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dataset.kind",     "dataset.path",      "dataset.n_train",  "dataset.n_test",   "dataset.n",
      "dataset.classes",  "dataset.separation", "dataset.noise",    "net.layers",       "constraint.kind",
      "constraint.lambda", "constraint.eps",    "constraint.tol",   "constraint.incidence", "optim.kind",
      "optim.iters",      "optim.batch",       "optim.lr",         "optim.eval_every", "schedule.mode",
      "schedule.eta0",    "schedule.burn_in",  "seed",             "out",              "check.trials",
      "check.inject"};
  return keys;
}

ExperimentConfig parse_config_text(std::string_view text, std::span<const std::string> overrides,
                                   std::optional<std::string> env_seed, bool for_training) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    entries.push_back(split_assignment(line, "line " + std::to_string(lineno)));
  }
  for (const auto& o : overrides) entries.push_back(split_assignment(o, "--set " + o));

  ExperimentConfig config;
  bool has_seed = false;
  for (const auto& [key, value] : entries) {
    apply(config, key, value);
    has_seed = has_seed || key == "seed";
  }
  if (!has_seed) {
    if (!env_seed) throw ConfigError("missing mandatory key 'seed' (set it in the config, via --set or CGC_SEED)");
    apply(config, "seed", *env_seed);
  }
  if (!for_training) return config;

  if (is_constrained(config.optimizer) && !config.constraint_kind) {
    throw ConfigError("missing mandatory key 'constraint.kind' for optimizer " +
                      std::string(to_string(config.optimizer)));
  }
  if (config.constraint_kind == ConstraintKind::TV && config.incidence.empty()) {
    throw ConfigError("constraint.kind=TVBall requires constraint.incidence (only 'network' is supported)");
  }
  if (config.dataset.kind == "mnist" && !std::filesystem::exists(config.dataset.path)) {
    throw ConfigError("dataset.path: '" + config.dataset.path.string() + "' does not exist");
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::span<const std::string> overrides,
                              bool for_training) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::optional<std::string> env_seed;
  if (const char* s = std::getenv("CGC_SEED")) env_seed = std::string(s);
  return parse_config_text(buffer.str(), overrides, env_seed, for_training);
}

}  // namespace cgc
