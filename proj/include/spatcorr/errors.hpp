#pragma once

#include <stdexcept>
#include <string>

namespace spatcorr {

enum class errc {
  invalid_input,
  no_support_at_lag,
  degenerate_g,
  insufficient_subjects,
  no_usable_pairs,
  invalid_correlation,
  taper_exceeds_grid,
  bias_undefined,
};

const char* errc_name(errc code);

/// Library error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message);
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] void raise(errc code, const std::string& message);

}  // namespace spatcorr
