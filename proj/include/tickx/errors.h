#ifndef TICKX_ERRORS_H_
#define TICKX_ERRORS_H_

#include <stdexcept>
#include <string>

namespace tickx {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnknownSymbol : public Error {
 public:
  explicit UnknownSymbol(const std::string &symbol)
      : Error("unknown symbol: " + symbol), symbol_(symbol) {}
  const std::string &symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

class NoHistory : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class SectionTooWide : public Error {
 public:
  using Error::Error;
};

}  // namespace tickx

#endif  // TICKX_ERRORS_H_
