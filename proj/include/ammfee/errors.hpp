#pragma once

#include <stdexcept>
#include <string>

namespace ammfee {

// Invalid pool or grid construction (non-positive rates, inconsistent ladders).
class GridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Signed grid index outside {-N, ..., N}.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A quote side requested at the grid edge where it does not exist.
class BoundaryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Non-finite or otherwise unusable numeric input.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Overflow or non-finite values inside the equilibrium solver.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment/simulation configuration that cannot run.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ammfee
