#pragma once

#include <stdexcept>
#include <string>

namespace msmac {

// Analytic recursion left its validity region (denominator <= 0 or negative probability).
class OverloadError : public std::runtime_error {
 public:
  explicit OverloadError(const std::string& what) : std::runtime_error(what) {}
};

// A fixed-point solver exhausted its iteration budget.
class NonConvergenceError : public std::runtime_error {
 public:
  explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Reports being compared were produced from different scenarios.
class ScenarioMismatch : public std::runtime_error {
 public:
  explicit ScenarioMismatch(const std::string& what) : std::runtime_error(what) {}
};

// The exact-chain oracle would need a queue longer than its cap.
class StateSpaceOverflow : public std::runtime_error {
 public:
  explicit StateSpaceOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Scenario file is not syntactically well formed.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& what, const std::string& where = "")
      : std::runtime_error(where.empty() ? what : where + ": " + what) {}
};

// Scenario file parsed but violates a semantic rule (missing field, failed validation).
class SemanticError : public std::runtime_error {
 public:
  explicit SemanticError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msmac
