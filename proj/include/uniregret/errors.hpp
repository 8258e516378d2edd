#ifndef UNIREGRET_ERRORS_HPP
#define UNIREGRET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace uniregret {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Index or time step outside the admissible range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Internally inconsistent FeatureSpec or AdversarySpec.
class SpecError : public Error {
public:
  using Error::Error;
};

/// Parameter outside its precondition (delta <= 0, beta_C <= 0, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Vector/matrix dimension mismatch.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Factorization failure or corrupted numerical state.
class NumericError : public Error {
public:
  using Error::Error;
};

/// API misuse, e.g. mixing results of different runs.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Operation not defined for the requested feature class.
class UnsupportedClassError : public Error {
public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace uniregret

#endif  // UNIREGRET_ERRORS_HPP
