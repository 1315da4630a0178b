#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdiv {

enum class ErrorCode {
  parse_error,
  dimension_mismatch,
  field_mismatch,
  index_out_of_range,
  division_by_zero,
  null_violated,
  non_spd,
  zero_row,
  rank_deficient_input,
  negative_t_degree,
  q_too_large,
  cholesky_failure,
  singular_metric,
  no_convergence,
  precondition_unmet,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::field_mismatch: return "field_mismatch";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::division_by_zero: return "division_by_zero";
    case ErrorCode::null_violated: return "null_violated";
    case ErrorCode::non_spd: return "non_spd_V";
    case ErrorCode::zero_row: return "zero_row";
    case ErrorCode::rank_deficient_input: return "rank_deficient_input";
    case ErrorCode::negative_t_degree: return "negative_t_degree";
    case ErrorCode::q_too_large: return "q_too_large";
    case ErrorCode::cholesky_failure: return "cholesky_failure";
    case ErrorCode::singular_metric: return "singular_metric";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::precondition_unmet: return "precondition_unmet";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// command-line front end can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with a 1-based source location.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorCode::parse_error, "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace wdiv
