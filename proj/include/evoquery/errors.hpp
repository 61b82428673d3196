#pragma once

#include <stdexcept>
#include <string>

namespace evoquery {

// Error categories map onto CLI exit codes: ConfigError -> 2,
// DataError -> 3, BackendError -> 4.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BackendError : std::runtime_error {
    explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evoquery
