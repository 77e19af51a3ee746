#pragma once

#include <stdexcept>
#include <string>

namespace opnkit {

/// Precondition violated by the caller (zero where a positive value is
/// required, a composite where a prime is required, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// The toolkit declined to compute something that exceeds a configured budget
/// (factoring bit budget, naive-oracle cap). Never a silent wrong answer.
class RefusalError : public std::runtime_error {
 public:
  explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

/// A proven mathematical fact failed to hold on concrete data. Either the
/// implementation has a bug or a published argument does not cover the case.
class InconsistencyError : public std::logic_error {
 public:
  explicit InconsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// An output file could not be written.
class OutputError : public std::runtime_error {
 public:
  explicit OutputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace opnkit
