#pragma once

#include <stdexcept>
#include <string>

namespace phifem {

// Base class for all phifem errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// A user-supplied phi failed validation probing (positivity, limits at the
// endpoints, or an inconsistent closed-form potential).
class PhiValidationError : public Error {
public:
    explicit PhiValidationError(const std::string &msg) : Error(msg) {}
};

// t |-> t*phi(t) decreased between two probe points.
class NonMonotoneError : public PhiValidationError {
public:
    NonMonotoneError(const std::string &msg, double where)
        : PhiValidationError(msg), t(where) {}
    double t; // probe abscissa at which the violation was detected
};

// Growth indices outside the admissible range (ell <= 1, or m >= N when
// building the Sobolev conjugate).
class IndexOutOfRangeError : public Error {
public:
    explicit IndexOutOfRangeError(const std::string &msg) : Error(msg) {}
};

// Adaptive quadrature did not reach the requested tolerance.
class QuadratureFailure : public Error {
public:
    explicit QuadratureFailure(const std::string &msg) : Error(msg) {}
};

// A monotone root bracket could not be established within the search caps.
class BracketFailure : public Error {
public:
    explicit BracketFailure(const std::string &msg) : Error(msg) {}
};

// Fields defined on different meshes were combined.
class MeshMismatch : public Error {
public:
    explicit MeshMismatch(const std::string &msg) : Error(msg) {}
};

// Mesh construction parameters out of range.
class InvalidDimensions : public Error {
public:
    explicit InvalidDimensions(const std::string &msg) : Error(msg) {}
};

// Config or expression text failed to parse; carries a 1-based line number
// (0 when not applicable, e.g. inline expressions).
class ConfigParseError : public Error {
public:
    ConfigParseError(const std::string &msg, int line_number = 0)
        : Error(line_number > 0 ? "line " + std::to_string(line_number) + ": " + msg
                                : msg),
          line(line_number) {}
    int line;
};

} // namespace phifem
