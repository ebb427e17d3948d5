#pragma once

#include <stdexcept>
#include <string>

namespace tcdst {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, inconsistent configuration, schema
// violations. The CLI maps these to exit code 1, everything else to 2.
struct ValidationError : Error {
  using Error::Error;
};

struct ConfigError : ValidationError { using ValidationError::ValidationError; };
struct CorpusError : ValidationError { using ValidationError::ValidationError; };
struct SchemaError : ValidationError { using ValidationError::ValidationError; };
struct VocabError : ValidationError { using ValidationError::ValidationError; };
struct CapacityError : ValidationError { using ValidationError::ValidationError; };

struct DimensionError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct AlignmentError : Error { using Error::Error; };
struct InvalidSpanError : Error { using Error::Error; };
struct NoSpanError : Error { using Error::Error; };
struct StateError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct UndefinedValueError : Error { using Error::Error; };

}  // namespace tcdst
