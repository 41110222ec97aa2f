#pragma once

#include <stdexcept>
#include <string>

namespace spw {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Grid dimensions disagree: mismatched operands, crops larger than the
// source, sizes that the pyramid cannot divide.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Argument outside its documented domain (non-positive factor, bad class count...).
class DomainError : public Error {
public:
    using Error::Error;
};

// File could not be read, parsed, or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace spw
