#pragma once

#include <stdexcept>
#include <string>

namespace mimicaudit {

// Base of every toolkit error. Catch this at the boundary; catch the concrete
// types where the reaction differs (CLI maps them to distinct exit codes).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input bytes or text: broken RIFF structure, bad CSV row, bad JSON.
struct FormatError : Error {
    using Error::Error;
};

// Input is structurally valid but outside the supported subset
// (e.g. compressed WAV, 24-bit samples, >2 channels).
struct UnsupportedFormatError : FormatError {
    using FormatError::FormatError;
};

// Input container declares more payload than the bytes actually present.
struct TruncationError : FormatError {
    using FormatError::FormatError;
};

// Filename does not follow the corpus naming convention (4 digits + r/f).
struct NamingError : FormatError {
    using FormatError::FormatError;
};

// Caller passed an argument outside its documented domain.
struct ParamError : Error {
    using Error::Error;
};

// An operation that needs at least one element got none.
struct EmptyInputError : Error {
    using Error::Error;
};

// Data is present but unusable: a single class where two are needed,
// fewer samples than a fit requires, duplicate sample indices.
struct DataError : Error {
    using Error::Error;
};

// A requested metric is undefined for the given confusion counts.
struct MetricError : Error {
    using Error::Error;
};

// Persisted artifact carries an incompatible schema version.
struct SchemaError : Error {
    using Error::Error;
};

// Filesystem failure: unreadable directory, unwritable output, rename failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace mimicaudit
