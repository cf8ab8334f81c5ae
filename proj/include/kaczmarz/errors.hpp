#pragma once

#include <stdexcept>
#include <string>

namespace kaczmarz {

/// Raised for malformed or inconsistent input data (files, matrices, vectors).
/// Argument/shape misuse is reported with std::invalid_argument instead.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by make_rhs when an inconsistent right-hand side is requested but
/// null(A^T) is trivial.
class NoResidualPossible : public DataError {
public:
    NoResidualPossible() : DataError("no residual possible: null(A^T) = {0}") {}
};

} // namespace kaczmarz
