#pragma once

#include "msbaco/selector.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace msbaco {

/// Flat `key = value` file with TOML syntax for scalars: quoted strings,
/// integers, floats, true/false and `#` comments. A relative `dataset`
/// path resolves against the file's directory.
ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});

/// Sets one field from its textual value. Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

/// Keys accepted by apply_setting.
const std::vector<std::string>& config_keys();

}  // namespace msbaco
