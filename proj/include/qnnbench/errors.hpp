#pragma once

#include <stdexcept>
#include <string>

namespace qnnbench {

// Dimension or length mismatch between data and a model/layer structure.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside its documented domain (bad qubit count, feature range, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Qubit or element index out of range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Malformed input file (IDX, PGM, JSON manifests).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough source points to satisfy a requested subset.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing or inconsistent data for an experiment.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A required prior result (e.g. completed suite) is absent.
struct DependencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate regression / fit input.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qnnbench
