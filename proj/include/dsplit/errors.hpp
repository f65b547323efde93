#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dsplit {

/// Bad input: malformed configuration, out-of-range parameters, inconsistent shapes.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A run could not continue: singular line system, non-finite values, blowup.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration errors are collected rather than reported one at a time.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> messages)
        : ValidationError(join(messages)), messages_(std::move(messages)) {}

    const std::vector<std::string>& messages() const noexcept { return messages_; }

private:
    static std::string join(const std::vector<std::string>& messages) {
        std::string out;
        for (const auto& m : messages) {
            if (!out.empty()) out += '\n';
            out += m;
        }
        return out;
    }

    std::vector<std::string> messages_;
};

} // namespace dsplit
