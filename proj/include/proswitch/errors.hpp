#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proswitch {

enum class ErrorKind {
  input,
  parse,
  empty_lexicon,
  io,
  transport,
  unparseable_trace,
  missing_style,
  degenerate_data,
  unsatisfiable_plan,
  classification,
  augmentation,
};

const char* to_string(ErrorKind kind);

// Process exit code used by the CLI for each error kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed structured input. `line` is 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TransportError : public Error {
 public:
  TransportError(int status, const std::string& message);

  // Last provider status; 0 for connection-level failures.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace proswitch
