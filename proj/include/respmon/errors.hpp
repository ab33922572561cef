#pragma once

#include <stdexcept>
#include <string>

namespace respmon {

// A precondition on an operation's arguments was violated.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configuration is internally inconsistent (e.g. a frame would exceed the MTU).
class InvalidConfig : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The analysis window is not covered by enough data.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A config document could not be parsed. key() names the offending entry.
class ConfigParseError : public std::runtime_error {
public:
    ConfigParseError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace respmon
