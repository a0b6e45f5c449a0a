#include "medverify/errors.hpp"

namespace medverify {

namespace {

std::string join_violations(const std::string& context, const std::vector<std::string>& items) {
  std::string message = context;
  for (const auto& item : items) {
    message += "\n  - ";
    message += item;
  }
  return message;
}

}  // namespace

ValidationError::ValidationError(const std::string& context, std::vector<std::string> violations)
    : Error(join_violations(context, violations)), violations_(std::move(violations)) {}

}  // namespace medverify
