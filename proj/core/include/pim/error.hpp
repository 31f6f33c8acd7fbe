#pragma once

#include <stdexcept>
#include <string>

namespace pim {

/// Bad input: violated precondition, malformed file, unknown option.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed: non-PD matrix, non-convergence, singular system.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::string diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

}  // namespace pim
