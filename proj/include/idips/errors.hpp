#pragma once

#include <stdexcept>
#include <string>

namespace idips {

enum class ErrorCode {
  UnknownVariable,
  UnknownOperator,
  DimensionMismatch,
  KindMismatch,
  ArityMismatch,
  UnknownAction,
  DuplicateParam,
  ParseError,
  MissingInput,
  SchemaError,
  TooManyParams,
  BudgetExceeded,
  NoCandidate,
  BlankNotAllowed,
  ProtocolError,
  IoError,
};

const char* error_code_name(ErrorCode code);

// Every failure surfaced by the library carries a code so the CLI and the
// session server can report it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error(ErrorCode::ParseError, std::to_string(line) + ":" +
                                         std::to_string(column) + ": " +
                                         message),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace idips
