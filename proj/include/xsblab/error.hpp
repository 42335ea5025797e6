#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xsblab {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_convergence,
  blow_up,
  outside_contraction,
  io,
};

std::string_view to_string(ErrorCode code);

/// Structured error carried by every failing operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error for quadratures that stopped before reaching their tolerance; keeps
/// the partial value so callers can still report it.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& message, double partial_value, double achieved_tolerance)
      : Error(ErrorCode::non_convergence, message),
        partial_value_(partial_value),
        achieved_tolerance_(achieved_tolerance) {}

  double partial_value() const noexcept { return partial_value_; }
  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double partial_value_;
  double achieved_tolerance_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace xsblab
