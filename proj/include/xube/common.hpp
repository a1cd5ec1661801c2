#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace xube {

// All randomness flows through an explicitly passed engine; there is no global RNG.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad parameters, unsupported capability combinations, malformed specs.
// The CLI maps these to exit code 2.
class ConfigError : public Error {
  public:
    using Error::Error;
};

class ParseError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class InvalidActionError : public Error {
  public:
    using Error::Error;
};

// Raised when an action is requested in a state that has none.
class DeadEndError : public Error {
  public:
    using Error::Error;
};

class CorruptFileError : public Error {
  public:
    using Error::Error;
};

class VersionMismatchError : public Error {
  public:
    using Error::Error;
};

// Internal consistency failure (a broken invariant, not a user error).
class InternalError : public Error {
  public:
    using Error::Error;
};

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Shortest text that reads back to the same double; "nan" / "inf" / "-inf" otherwise.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace xube
