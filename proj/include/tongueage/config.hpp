#ifndef TONGUEAGE_CONFIG_HPP
#define TONGUEAGE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tongueage/trainer.hpp"

namespace tongueage {

/// Keys accepted in config files and as CLI flags (underscores in files,
/// dashes or underscores on the command line).
const std::vector<std::string>& train_config_keys();

/// Sets one field from text; ConfigError on unknown key or bad value.
void apply_config_value(TrainConfig& config, const std::string& key, const std::string& value);

/// Parses "key = value" lines; '#' starts a comment.
TrainConfig parse_train_config(const std::string& text, TrainConfig base = {});
TrainConfig load_train_config(const std::string& path, TrainConfig base = {});

/// Every field as (key, value) in train_config_keys() order.
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config);
/// "key=value" lines; reparsing them reproduces the config exactly.
std::string describe(const TrainConfig& config);
/// FNV-1a of describe(config), as 16 hex digits.
std::string config_digest(const TrainConfig& config);

}  // namespace tongueage

#endif  // TONGUEAGE_CONFIG_HPP
