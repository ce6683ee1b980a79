#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes: usage/parse errors -> 1, capacity/unsupported -> 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

class CarrierMismatch : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

class CapacityError : public Error {
  public:
    CapacityError(const std::string& what, std::size_t cap)
        : Error(what), cap_(cap) {}

    std::size_t cap() const { return cap_; }

  private:
    std::size_t cap_;
};

class UnsupportedCase : public Error {
  public:
    using Error::Error;
};

class AmbiguityError : public Error {
  public:
    using Error::Error;
};

class MultiplicityError : public Error {
  public:
    using Error::Error;
};

class InternalInconsistency : public Error {
  public:
    using Error::Error;
};

} // namespace tsl
