#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vfb {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = VectorX<double>;

enum class ErrorKind {
  validation,
  invalid_initial_data,
  domain,
  no_positive_root,
  threshold_violated,
  precondition_violated,
  front_collapse,
  step_rejected,
  non_convergence,
  iteration_failure,
  bracket_invalid,
  monotonicity_violation,
};

constexpr const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::invalid_initial_data: return "invalid_initial_data";
    case ErrorKind::domain: return "domain";
    case ErrorKind::no_positive_root: return "no_positive_root";
    case ErrorKind::threshold_violated: return "threshold_violated";
    case ErrorKind::precondition_violated: return "precondition_violated";
    case ErrorKind::front_collapse: return "front_collapse";
    case ErrorKind::step_rejected: return "step_rejected";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::iteration_failure: return "iteration_failure";
    case ErrorKind::bracket_invalid: return "bracket_invalid";
    case ErrorKind::monotonicity_violation: return "monotonicity_violation";
  }
  return "unknown";
}

/// True for errors caused by bad input rather than by a numerical failure.
constexpr bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::invalid_initial_data:
    case ErrorKind::domain:
    case ErrorKind::no_positive_root:
    case ErrorKind::threshold_violated:
    case ErrorKind::precondition_violated:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vfb
