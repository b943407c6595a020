#pragma once

#include <stdexcept>
#include <string>

namespace qmaps {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class DimensionNotSquare : public Error {
public:
  using Error::Error;
};

class NotHermitian : public Error {
public:
  using Error::Error;
};

class NoConvergence : public Error {
public:
  using Error::Error;
};

class Singular : public Error {
public:
  using Error::Error;
};

class IllConditioned : public Error {
public:
  using Error::Error;
};

class TargetTooSmall : public Error {
public:
  using Error::Error;
};

class SignPatternMismatch : public Error {
public:
  using Error::Error;
};

class NumericalBreakdown : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class UnknownFixture : public Error {
public:
  using Error::Error;
};

class ParamOutOfRange : public Error {
public:
  using Error::Error;
};

}  // namespace qmaps
