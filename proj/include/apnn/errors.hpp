#pragma once

#include <stdexcept>
#include <string>

namespace apnn {

// Bad user input: malformed config, dimension mismatch, unknown problem id.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value or numerical breakdown; carries enough context to locate
// the offending step.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace apnn
