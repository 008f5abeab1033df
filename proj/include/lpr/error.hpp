#pragma once

#include <stdexcept>
#include <string>

namespace lpr {

// Error categories map onto CLI exit codes: config/usage -> 1,
// data/file problems -> 2, failed internal checks -> 3.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lpr
