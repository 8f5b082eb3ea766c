#pragma once

#include <stdexcept>
#include <string>

namespace tissue_optics {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad wavelength, composition, grid, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Lookup of a named preset or constituent failed.
class NotFound : public Error {
public:
    using Error::Error;
};

/// The normal equations of a fit are rank deficient.
class DegenerateFit : public Error {
public:
    using Error::Error;
};

/// NMSE requested against an all-zero reference.
class UndefinedNormalization : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tissue_optics
