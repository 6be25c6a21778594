#pragma once

#include <stdexcept>
#include <string>

namespace chainplace {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown datacenter, chain, or PoA identifier.
class lookup_error : public error {
public:
    using error::error;
};

/// Malformed topology input (antenna outside the area, empty antenna set, ...).
class construction_error : public error {
public:
    using error::error;
};

/// A VM was given no more CPU than its load, so its M/M/1 delay diverges.
class infinite_delay_error : public error {
public:
    using error::error;
};

/// A chain was evaluated on a datacenter that is not on its PoA-to-root path.
class off_path_error : public error {
public:
    using error::error;
};

/// Invalid argument to an algorithm (budget below threshold, empty feasible sets, ...).
class invalid_input_error : public error {
public:
    using error::error;
};

/// Exhaustive enumeration refused because the search space exceeds the configured limit.
class search_space_error : public error {
public:
    using error::error;
};

/// Scenario or catalog configuration problem.
class config_error : public error {
public:
    using error::error;
};

} // namespace chainplace
