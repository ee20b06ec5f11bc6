#pragma once

#include <stdexcept>
#include <string>

namespace stdloc {

// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values, broken invariants, dimension mismatches.
class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error(msg) {}
};

// Numerical failure: ill-conditioning, degenerate resolution, indefinite
// matrices, filter divergence.
class numeric_error : public error {
public:
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

// Configuration parsing/validation problems; message carries the field path.
class config_error : public error {
public:
    explicit config_error(const std::string& msg) : error(msg) {}
};

// Filesystem and serialization failures.
class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

} // namespace stdloc
