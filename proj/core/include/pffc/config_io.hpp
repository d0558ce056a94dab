#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "pffc/experiment.hpp"

namespace pffc {

/// Flat `key = value` text, one key per line, `#` starts a comment. Doubles
/// are written with 17 significant digits so parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Applies the keys in `is` on top of `base`. Indexed keys (notch.N,
/// desired.N, control.N) replace the whole list on their first occurrence;
/// `notch = none` clears it. Throws ConfigError with the line number.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base);

/// Reads a config file. The base is preset(experiment) if given, otherwise
/// the preset named by the file's `experiment` key.
ExperimentConfig load_config(const std::string& path, std::optional<int> experiment = std::nullopt);

}  // namespace pffc
