#pragma once

#include <stdexcept>
#include <string>

namespace opo {

// Raised when a scenario or a domain value fails validation. `key` is the
// dotted config path when the value came from a scenario file.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& message, std::string key = {})
        : std::invalid_argument(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Raised when a solver or a physical model cannot produce a consistent result.
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace opo
