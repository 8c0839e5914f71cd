#include "spatcorr/errors.hpp"

namespace spatcorr {

const char* errc_name(errc code) {
  switch (code) {
    case errc::invalid_input: return "invalid-input";
    case errc::no_support_at_lag: return "no-support-at-lag";
    case errc::degenerate_g: return "degenerate-G";
    case errc::insufficient_subjects: return "insufficient-subjects";
    case errc::no_usable_pairs: return "no-usable-pairs";
    case errc::invalid_correlation: return "invalid-correlation";
    case errc::taper_exceeds_grid: return "taper-exceeds-grid";
    case errc::bias_undefined: return "bias-undefined";
  }
  return "unknown";
}

Error::Error(errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void raise(errc code, const std::string& message) { throw Error(code, message); }

}  // namespace spatcorr
