#pragma once

#include <stdexcept>
#include <string>

namespace sift {

// Error kinds used across the library. Each maps to one class of contract
// violation so callers (and the CLI error JSON) can dispatch on it.
namespace errkind {
inline constexpr const char* dimension = "dimension_error";
inline constexpr const char* numeric = "numeric_error";
inline constexpr const char* index = "index_error";
inline constexpr const char* contract = "contract_error";
inline constexpr const char* format = "format_error";
inline constexpr const char* io = "io_error";
inline constexpr const char* config = "config_error";
inline constexpr const char* degenerate_data = "degenerate_data_error";
inline constexpr const char* vocab_mismatch = "vocab_mismatch_error";
inline constexpr const char* phase_order = "phase_order_error";
inline constexpr const char* convergence = "convergence_error";
}  // namespace errkind

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(const char* kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool cond, const char* kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace sift
