#pragma once

#include <stdexcept>
#include <string>

namespace bnpcea {

// Malformed input text (CSV rows, JSONL records, config lines).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite densities, degenerate Gamma parameters, failed quadrature.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the support of a kernel (e.g. t beyond the hazard grid).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace bnpcea
