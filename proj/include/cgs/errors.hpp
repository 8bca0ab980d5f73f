#ifndef CGS_ERRORS_HPP
#define CGS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cgs {

// Shape or size disagreement between operands.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument value (non-positive temperature, zero rounds, ...).
class ParameterError : public std::runtime_error {
public:
    explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// All node layouts coincide; normalization undefined.
class DegenerateGeometryError : public ParameterError {
public:
    explicit DegenerateGeometryError(const std::string& what) : ParameterError(what) {}
};

// Graph is not a rooted tree (cycle, several roots, disconnected).
class InvalidTopologyError : public std::runtime_error {
public:
    explicit InvalidTopologyError(const std::string& what) : std::runtime_error(what) {}
};

// Constraints admit no selection (all-masked row, empty feasible set).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Exhaustive enumeration guard exceeded.
class SizeError : public std::runtime_error {
public:
    explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (missing column, bad cell, unknown key).
class IngestError : public std::runtime_error {
public:
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

// Training loss became non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cgs

#endif  // CGS_ERRORS_HPP
