#pragma once

#include <stdexcept>
#include <string>

namespace pate {

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

// Ingestion / schema errors.
struct MissingColumn : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct EmptyDataset : Error {
  using Error::Error;
};
struct InvariantViolation : Error {
  using Error::Error;
};

// Numerical / statistical errors.
struct LengthMismatch : Error {
  using Error::Error;
};
struct DegenerateColumn : Error {
  using Error::Error;
};
struct SingularDesign : Error {
  using Error::Error;
};
struct MissingFeature : Error {
  using Error::Error;
};
struct DegenerateLeaf : Error {
  using Error::Error;
};
struct NoSamples : Error {
  using Error::Error;
};
struct DegenerateTarget : Error {
  using Error::Error;
};
struct InsufficientSamples : Error {
  using Error::Error;
};

}  // namespace pate
