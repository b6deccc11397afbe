#pragma once

#include <stdexcept>
#include <string>

namespace dyncap {

// Argument outside the open interval (0,1) or state outside the admissible
// set {S_i > 0, sum S_i < 1}.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Value outside the attainable range of a monotone map (e.g. beta inverse).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RootFindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear solve failed: singular operator or iteration did not converge.
class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Outer Picard/homotopy iteration did not reach the fixed-point tolerance.
class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class EntropyViolation : public std::runtime_error {
 public:
  EntropyViolation(const std::string& what, int step, double margin)
      : std::runtime_error(what), step_(step), margin_(margin) {}
  int step() const noexcept { return step_; }
  double margin() const noexcept { return margin_; }

 private:
  int step_;
  double margin_;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dyncap
