#pragma once

#include <stdexcept>
#include <string>

namespace hde {

// Error categories map one-to-one onto CLI exit codes (2, 3, 4).

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rethrows the in-flight exception with `context` prepended to its message,
/// keeping the error category. Must be called from inside a catch block.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace hde
