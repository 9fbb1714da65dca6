#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace a2p {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments. Maps to CLI exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data. Maps to CLI exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class UnmappedCodepoint : public DataError {
 public:
  UnmappedCodepoint(char32_t codepoint, std::size_t position);
  char32_t codepoint() const { return codepoint_; }
  std::size_t position() const { return position_; }

 private:
  char32_t codepoint_;
  std::size_t position_;
};

class NonAsciiInput : public DataError {
 public:
  explicit NonAsciiInput(std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class EmptyCorpus : public DataError {
 public:
  EmptyCorpus() : DataError("empty corpus") {}
};

class LengthMismatch : public DataError {
 public:
  LengthMismatch(std::size_t lhs, std::size_t rhs);
};

class UnknownPhone : public DataError {
 public:
  explicit UnknownPhone(const std::string& symbol)
      : DataError("unknown phone '" + symbol + "'"), symbol_(symbol) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class DimensionMismatch : public DataError {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual);
};

}  // namespace a2p
