#pragma once

#include <stdexcept>
#include <string>

namespace evanno {

// Root of everything this library throws on bad input or failed I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// A value rejected by the coding schema.
class ValidationError : public Error {
 public:
  ValidationError(std::string variable, std::string token, const std::string& what)
      : Error(what), variable_(std::move(variable)), token_(std::move(token)) {}

  const std::string& variable() const noexcept { return variable_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::string variable_;
  std::string token_;
};

}  // namespace evanno
