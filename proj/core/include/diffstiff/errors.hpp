#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace diffstiff {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed problem document (JSON syntax).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed document that violates the model invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite numeric input.
class UnitError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Shape or length mismatch between collaborating objects.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Degenerate element geometry (zero length).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The reduced stiffness matrix is not positive definite: the structure is a
/// mechanism or has an unconnected free degree of freedom.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(const std::string& what, std::size_t pivot)
        : Error(what), pivot_(pivot) {}

    /// Free-DOF index (unpermuted) of the offending pivot.
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Analysis failed inside a finite-difference stencil.
class FiniteDifferenceError : public Error {
public:
    FiniteDifferenceError(const std::string& what, std::size_t coordinate)
        : Error(what), coordinate_(coordinate) {}

    std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

/// Optimizer could not proceed (bad settings, failed line search with no
/// usable iterate, ...).
class OptimizerError : public Error {
public:
    using Error::Error;
};

}  // namespace diffstiff
