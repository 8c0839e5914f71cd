#pragma once

#include <string>

namespace spatcorr {

enum class KernelFamily { epanechnikov, quartic, triangular };

KernelFamily kernel_family_from_string(const std::string& name);
const char* to_string(KernelFamily family);

/// Bandwidth in lag units. Global uses one h everywhere; TwoRegime switches
/// hard between h_near (|delta| <= split_delta) and h_far (|delta| > split_delta).
struct BandwidthPolicy {
  enum class Kind { global, two_regime };

  static BandwidthPolicy global(double h);
  static BandwidthPolicy two_regime(double h_near, double h_far, double split_delta);

  /// Bandwidth used for a query at lag delta.
  double at(double abs_delta) const {
    return kind == Kind::global ? h : (abs_delta <= split_delta ? h_near : h_far);
  }

  double max_bandwidth() const {
    return kind == Kind::global ? h : (h_near > h_far ? h_near : h_far);
  }

  void validate() const;

  Kind kind = Kind::global;
  double h = 0.0;
  double h_near = 0.0;
  double h_far = 0.0;
  double split_delta = 0.0;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
  BandwidthPolicy bandwidth = BandwidthPolicy::global(1.0);

  void validate() const { bandwidth.validate(); }
};

struct KernelMoments {
  double sigma_k_sq;  // int u^2 K(u) du
  double r_k;         // int K(u)^2 du
};

/// Base kernel density K(u); symmetric, supported on [-1, 1], integrates to 1.
double kernel_eval(KernelFamily family, double u);
inline double kernel_eval(const KernelSpec& spec, double u) { return kernel_eval(spec.family, u); }

/// Closed-form kernel moments (sigma_K^2, R_K).
KernelMoments kernel_moments(KernelFamily family);
inline KernelMoments kernel_moments(const KernelSpec& spec) { return kernel_moments(spec.family); }

/// Scaled kernel K_h(x) = K(x/h)/h.
inline double kernel_scaled(KernelFamily family, double x, double h) {
  return kernel_eval(family, x / h) / h;
}

}  // namespace spatcorr
