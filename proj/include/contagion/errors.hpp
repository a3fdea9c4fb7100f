#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace contagion {

// Location inside an input file; line is 1-based, 0 when not applicable.
struct SourceLocation {
  std::string file;
  std::size_t line = 0;

  std::string describe() const {
    if (file.empty()) return {};
    return line == 0 ? file : file + ":" + std::to_string(line);
  }
};

class LocatedError : public std::runtime_error {
 public:
  LocatedError(SourceLocation where, const std::string& what)
      : std::runtime_error(where.describe().empty() ? what
                                                    : where.describe() + ": " + what),
        where_(std::move(where)) {}

  const SourceLocation& where() const noexcept { return where_; }

 private:
  SourceLocation where_;
};

// Malformed input row or header.
class ParseError : public LocatedError {
 public:
  using LocatedError::LocatedError;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public LocatedError {
 public:
  using LocatedError::LocatedError;
  explicit ValidationError(const std::string& what) : LocatedError({}, what) {}
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class UnachievableTargetError : public std::runtime_error {
 public:
  UnachievableTargetError(const std::string& what, double gamma_max, double lambda_at_max,
                          double lambda_target)
      : std::runtime_error(what),
        gamma_max_(gamma_max),
        lambda_at_max_(lambda_at_max),
        lambda_target_(lambda_target) {}

  double gamma_max() const noexcept { return gamma_max_; }
  double lambda_at_max() const noexcept { return lambda_at_max_; }
  double lambda_target() const noexcept { return lambda_target_; }

 private:
  double gamma_max_;
  double lambda_at_max_;
  double lambda_target_;
};

// lambda(gamma) increased between two scanned surcharge scales.
class NonMonotoneError : public std::runtime_error {
 public:
  NonMonotoneError(const std::string& what, double gamma_low, double lambda_low,
                   double gamma_high, double lambda_high)
      : std::runtime_error(what),
        gamma_low_(gamma_low),
        lambda_low_(lambda_low),
        gamma_high_(gamma_high),
        lambda_high_(lambda_high) {}

  double gamma_low() const noexcept { return gamma_low_; }
  double lambda_low() const noexcept { return lambda_low_; }
  double gamma_high() const noexcept { return gamma_high_; }
  double lambda_high() const noexcept { return lambda_high_; }

 private:
  double gamma_low_;
  double lambda_low_;
  double gamma_high_;
  double lambda_high_;
};

}  // namespace contagion
