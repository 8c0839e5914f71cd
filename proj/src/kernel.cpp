#include "spatcorr/kernel.hpp"

#include <cmath>

#include "spatcorr/errors.hpp"

namespace spatcorr {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "epanechnikov") return KernelFamily::epanechnikov;
  if (name == "quartic") return KernelFamily::quartic;
  if (name == "triangular") return KernelFamily::triangular;
  raise(errc::invalid_input, "unknown kernel family '" + name + "'");
}

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::quartic: return "quartic";
    case KernelFamily::triangular: return "triangular";
  }
  return "?";
}

BandwidthPolicy BandwidthPolicy::global(double h) {
  BandwidthPolicy p;
  p.kind = Kind::global;
  p.h = h;
  return p;
}

BandwidthPolicy BandwidthPolicy::two_regime(double h_near, double h_far, double split_delta) {
  BandwidthPolicy p;
  p.kind = Kind::two_regime;
  p.h_near = h_near;
  p.h_far = h_far;
  p.split_delta = split_delta;
  return p;
}

void BandwidthPolicy::validate() const {
  if (kind == Kind::global) {
    if (!(h > 0.0)) raise(errc::invalid_input, "bandwidth must be positive");
  } else {
    if (!(h_near > 0.0) || !(h_far > 0.0))
      raise(errc::invalid_input, "two-regime bandwidths must be positive");
    if (!(split_delta > 0.0)) raise(errc::invalid_input, "split_delta must be positive");
  }
}

double kernel_eval(KernelFamily family, double u) {
  double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (family) {
    case KernelFamily::epanechnikov:
      return 0.75 * (1.0 - u * u);
    case KernelFamily::quartic: {
      double w = 1.0 - u * u;
      return (15.0 / 16.0) * w * w;
    }
    case KernelFamily::triangular:
      return 1.0 - a;
  }
  return 0.0;
}

KernelMoments kernel_moments(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return {0.2, 0.6};
    case KernelFamily::quartic: return {1.0 / 7.0, 5.0 / 7.0};
    case KernelFamily::triangular: return {1.0 / 6.0, 2.0 / 3.0};
  }
  return {0.0, 0.0};
}

}  // namespace spatcorr
