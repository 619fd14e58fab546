#ifndef SEMCERT_ERRORS_HPP
#define SEMCERT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semcert {

// Caller passed a value that violates an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside the mathematical domain of a function (NaN, p > 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent combination of transform, noise and region.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested analytic quantity has no closed form for this pairing.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed binary input. Carries the byte offset where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace semcert

#endif  // SEMCERT_ERRORS_HPP
