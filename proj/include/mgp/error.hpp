#pragma once

#include <stdexcept>
#include <string>

namespace mgp {

/// Precondition or shape violation on user-supplied input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization failure, non-finite objective, degenerate weights.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed files and documents.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mgp
