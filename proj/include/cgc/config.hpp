#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgc/experiment.hpp"

namespace cgc {

/// Every key accepted in a config file or a --set override.
const std::vector<std::string>& config_keys();

/// Parses flat `key = value` lines (`#` starts a comment, blank lines ignored),
/// then applies each `key=value` override in order. When `seed` is absent the
/// value of `env_seed` (the CGC_SEED variable) is used; with neither, or on an
/// unknown key, bad value or missing mandatory key, throws ConfigError naming the key.
/// `for_training` = false skips the checks that only matter to `train`
/// (constraint.kind for constrained optimizers, dataset files).
ExperimentConfig parse_config_text(std::string_view text, std::span<const std::string> overrides = {},
                                   std::optional<std::string> env_seed = std::nullopt, bool for_training = true);

/// Reads `path` (which must exist) and forwards to parse_config_text with CGC_SEED from the environment.
ExperimentConfig parse_config(const std::filesystem::path& path, std::span<const std::string> overrides = {},
                              bool for_training = true);

}  // namespace cgc
