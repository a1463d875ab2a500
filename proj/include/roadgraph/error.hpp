#pragma once

#include <stdexcept>
#include <string>

namespace roadgraph {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes (see src/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or syntactically malformed input (JSON with field context).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Binary file with wrong magic, header or payload size.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Input parsed but violates a type invariant (duplicate ids, dangling edges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent parameters or dimension mismatch between weights and inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arguments outside a formula's domain (negative radicand and the like).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Exhaustive oracles refuse graphs above their node cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Window layout cannot satisfy coverage and overlap constraints.
class LayoutError : public Error {
 public:
  using Error::Error;
};

}  // namespace roadgraph
