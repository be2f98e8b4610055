#pragma once

#include <stdexcept>
#include <string>

namespace idlewave {

// Error hierarchy. Everything user-triggerable derives from Error so the CLI
// can catch one type and print a clean message; logic bugs use assert/logic_error.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidTopology : Error {
    using Error::Error;
};
struct InvalidSchedule : Error {
    using Error::Error;
};
struct MatchError : Error {
    using Error::Error;
};
struct InvalidTiming : Error {
    using Error::Error;
};
struct InvalidRank : Error {
    using Error::Error;
};
struct CalibrationError : Error {
    using Error::Error;
};
struct NoWaveDetected : Error {
    using Error::Error;
};
struct InsufficientFront : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace idlewave
