#pragma once

#include <stdexcept>
#include <string>

namespace qru {

// Base of every error the library raises. Subclasses map onto the CLI exit
// codes: usage-like errors (1), data errors (2) and numeric failures (3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// Parameter vector / feature vector shapes that disagree with a CircuitSpec.
class LayoutError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

// Operation illegal for the current object state (e.g. normalizing twice).
class StateError : public Error {
public:
    using Error::Error;
};

class NumericFailure : public Error {
public:
    using Error::Error;
};

} // namespace qru
