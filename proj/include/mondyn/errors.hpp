#pragma once

#include <stdexcept>
#include <string>

namespace mondyn {

// Branch enumeration exceeded its live-branch budget. The message tells the
// caller what to do instead (switch to sampling or raise the cap).
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was asked about a regime it does not cover, e.g. integrability
// classification for a model family where the criterion is not defined.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// A derived quantity (threshold cycle count, crossover time, ...) has no
// finite value for the given inputs, typically because the decoherence
// coefficient vanishes.
class UndefinedThresholdError : public std::runtime_error {
 public:
  explicit UndefinedThresholdError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration file problems, with file:line context where available.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mondyn
