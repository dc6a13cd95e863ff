// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace csifb {

// Every error carries a short machine-parsable class name; the CLI prints it
// as the first token of its single error line.
class Error : public std::runtime_error {
 public:
  Error(std::string cls, const std::string& what)
      : std::runtime_error(what), class_(std::move(cls)) {}
  const std::string& error_class() const noexcept { return class_; }

 private:
  std::string class_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config_error", w) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error("contract_error", w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain_error", w) {}
};
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& w) : Error("degenerate_input", w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error("io_error", w) {}
};

}  // namespace csifb
