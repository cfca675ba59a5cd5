#include "proswitch/errors.hpp"

namespace proswitch {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::empty_lexicon: return "empty lexicon";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::transport: return "transport error";
    case ErrorKind::unparseable_trace: return "unparseable reasoning trace";
    case ErrorKind::missing_style: return "missing style group";
    case ErrorKind::degenerate_data: return "degenerate data";
    case ErrorKind::unsatisfiable_plan: return "unsatisfiable plan";
    case ErrorKind::classification: return "classification error";
    case ErrorKind::augmentation: return "augmentation error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::transport:
    case ErrorKind::unparseable_trace:
    case ErrorKind::classification:
    case ErrorKind::augmentation:
      return 3;
    case ErrorKind::unsatisfiable_plan:
      return 4;
    case ErrorKind::io:
      return 1;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::parse,
            line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

TransportError::TransportError(int status, const std::string& message)
    : Error(ErrorKind::transport, message), status_(status) {}

}  // namespace proswitch
