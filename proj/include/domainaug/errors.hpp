#ifndef DOMAINAUG_ERRORS_HPP
#define DOMAINAUG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace domainaug {

// Invalid configuration (bad knob values, malformed config file). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken or inconsistent input data (datasets, label files, embedding files). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Embedding provider did not deliver within the configured timeout. CLI exit code 4.
class ProviderTimeout : public std::runtime_error {
 public:
  explicit ProviderTimeout(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace domainaug

#endif
