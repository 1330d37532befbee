#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace theston {

// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct NotPsdError : Error { using Error::Error; };
struct StabilityError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct NumericalError : Error { using Error::Error; };

// Invalid scenario configuration; `field` is a path like "model.Q_W".
struct ConfigError : Error {
  std::string field;
  ConfigError(std::string f, const std::string& msg)
      : Error(f + ": " + msg), field(std::move(f)) {}
};

}  // namespace theston
