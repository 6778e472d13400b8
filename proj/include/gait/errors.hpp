#pragma once

#include <stdexcept>
#include <string>

namespace gait {

// Invalid configuration values (bad bounds, bad dims, unknown config keys).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension/length mismatches at call boundaries.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (stepping a finished episode, sampling an empty buffer, ...).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values where finite ones are required.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mixing state or files across incompatible configurations.
struct CompatibilityError : std::runtime_error {
    explicit CompatibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint format version not supported by this build.
struct VersionError : std::runtime_error {
    explicit VersionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Truncated or syntactically broken files.
struct MalformedFileError : std::runtime_error {
    explicit MalformedFileError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gait
