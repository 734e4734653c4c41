#pragma once

#include <stdexcept>
#include <string>

namespace lsifr {

/// Base class for all errors raised by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A precondition or parameter constraint was violated.
class constraint_error : public error {
public:
    using error::error;
};

/// A file or stream did not match its expected format.
class format_error : public error {
public:
    using error::error;
};

/// Two values with different parameter identities were combined.
class incompatibility_error : public error {
public:
    using error::error;
};

/// Not enough data to produce a well-defined result
/// (empty statistic input, too few signatures, degenerate correlation).
class data_error : public error {
public:
    using error::error;
};

} // namespace lsifr
