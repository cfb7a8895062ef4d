#pragma once

#include "mi/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mi {

/// Applies one `key = value` setting. Keys: n, rate, method, m, replicates,
/// seed, estimand, level. List values are comma- or whitespace-separated.
void apply_setting(SimulationConfig& config, const std::string& key, const std::string& value);

/// Plain key-value text: one `key = value` per line, `#` starts a comment.
/// Settings not present keep the defaults of `base`.
SimulationConfig parse_config(std::istream& in, SimulationConfig base = {});
SimulationConfig load_config(const std::filesystem::path& path, SimulationConfig base = {});

}  // namespace mi
