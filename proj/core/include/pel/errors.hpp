#pragma once

#include <stdexcept>
#include <string>

namespace pel {

enum class ErrorCode {
  invalid_model,
  invalid_argument,
  degenerate_probability,
  enumeration_budget_exceeded,
  unknown_sentence,
  cache_corrupt,
  cache_miss,
  transport,
  parse,
  single_class,
};

/// Library-wide exception carrying a stable machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

  static const char* code_name(ErrorCode c) {
    switch (c) {
      case ErrorCode::invalid_model: return "invalid_model";
      case ErrorCode::invalid_argument: return "invalid_argument";
      case ErrorCode::degenerate_probability: return "degenerate_probability";
      case ErrorCode::enumeration_budget_exceeded: return "enumeration_budget_exceeded";
      case ErrorCode::unknown_sentence: return "unknown_sentence";
      case ErrorCode::cache_corrupt: return "cache_corrupt";
      case ErrorCode::cache_miss: return "cache_miss";
      case ErrorCode::transport: return "transport";
      case ErrorCode::parse: return "parse";
      case ErrorCode::single_class: return "single_class";
    }
    return "unknown";
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace pel
