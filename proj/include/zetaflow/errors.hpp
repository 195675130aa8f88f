#ifndef ZETAFLOW_ERRORS_HPP
#define ZETAFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace zf {

// Invalid input or config: maps to CLI exit code 2.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// The computation refuses to proceed (pole-proximal evaluation, unbracketed
// root, broken mixing assumption, ...): maps to CLI exit code 3.
struct RefusalError : std::runtime_error {
  explicit RefusalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A configured resource budget would be exceeded: maps to CLI exit code 4.
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace zf

#endif
