#pragma once

#include <stdexcept>
#include <string>

namespace spdckit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value fell outside a documented validity range (wavelength, temperature,
/// probability share, ...). The message names the violated bound.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A mathematically invalid input (zero denominator, unknown label, non-pure
/// fidelity target, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An inconsistent or incomplete configuration (missing geometry, bad grid,
/// poling fields on a non-QPM interaction, rank-deficient setting set, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File or text parsing failure; the message carries the source line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A bracketing root search found no sign change.
class NoRootError : public Error {
public:
    using Error::Error;
};

} // namespace spdckit
