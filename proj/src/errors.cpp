#include "nbconc/errors.hpp"

namespace nbconc {

DomainError::DomainError(std::string code, const std::string& detail)
    : std::domain_error(code + ": " + detail), code_(std::move(code)) {}

ParseError::ParseError(std::size_t line, const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ": " + detail), line_(line) {}

namespace detail {
void require(bool cond, const char* code, const std::string& detail) {
  if (!cond) throw DomainError(code, detail);
}
}  // namespace detail

}  // namespace nbconc
