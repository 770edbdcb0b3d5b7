#pragma once

#include <stdexcept>
#include <string>

namespace mktau {

/// Coarse failure class, used by the CLI to pick an exit code:
/// config -> 2, data -> 3, numeric -> 4.
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Invalid argument or configuration value.
class ParamError : public Error {
public:
  explicit ParamError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// File does not conform to its declared external format.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Content fails a semantic check (non-finite values, inconsistent columns, ...).
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Operating-system level I/O failure, message carries the OS error text.
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Degenerate numerical situation: tied pairs everywhere, zero spectral
/// denominators, constant windows, failed decompositions.
class DegenerateError : public Error {
public:
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

}  // namespace mktau
