#pragma once

#include <string>
#include <variant>

#include "s2/experiments.hpp"

namespace s2::cfg {

/// Malformed or unknown configuration content.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct PresetJob {
  std::string name;
  exp::PresetOptions options;
  std::string output;
};

using Job = std::variant<PresetJob, exp::RunSpec>;

/// Parses a JSON experiment description; see docs/config.md.
Job parse_config(const std::string& text);

ErrorFunction parse_error_function_name(const std::string& name, double weight = 1.0);

}  // namespace s2::cfg
