#pragma once

#include <stdexcept>
#include <string>

namespace pathway {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 2, DataError -> 3,
// InternalError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pathway
