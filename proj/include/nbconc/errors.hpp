#pragma once

#include <stdexcept>
#include <string>

namespace nbconc {

// Precondition violation. code() is a short stable identifier such as
// "mgf-domain-exceeded"; what() carries code plus detail.
class DomainError : public std::domain_error {
 public:
  DomainError(std::string code, const std::string& detail);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Malformed external input (config files, count tables).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& detail);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {
void require(bool cond, const char* code, const std::string& detail);
}  // namespace detail

}  // namespace nbconc
