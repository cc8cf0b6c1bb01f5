#pragma once

#include <stdexcept>
#include <string>

namespace hstokes {

/// Input violates a documented precondition (grid sizes, compatibility, shapes).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Picard increments stopped contracting on the current horizon.
class NonContraction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Horizon halving reached the minimum admissible horizon without contraction.
class HorizonUnderflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature could not meet its tolerance within the subdivision budget.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Oracle time stepping constraint (CFL) or linear solve failure.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hstokes
