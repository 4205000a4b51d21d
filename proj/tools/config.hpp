#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "dsub/errors.hpp"
#include "dsub/experiment.hpp"

namespace dsub::cli {

/// Malformed config text (bad syntax, bad literal, duplicate key).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed value outside its allowed range, or inconsistent keys.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Key not recognised in strict mode.
class UnknownKey : public Error {
 public:
  using Error::Error;
};

/// Parses the flat `section.key = value` format. Blank lines are ignored
/// and `#` starts a comment. Missing keys keep their defaults from
/// experiment::ExperimentConfig. Messages carry the offending line number.
[[nodiscard]] experiment::ExperimentConfig parse_config(std::string_view text, bool strict = true);

/// Checks every range and cross-key constraint of a config.
void validate_config(const experiment::ExperimentConfig& config);

}  // namespace dsub::cli
