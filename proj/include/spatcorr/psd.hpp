#pragma once

#include <span>
#include <vector>

namespace spatcorr {

/// Lag taper w(delta) <= 1 applied before the cosine transform.
struct TaperWeight {
  enum class Kind { none, w1, w2 };

  static TaperWeight none();
  static TaperWeight w1(double d);              // indicator |delta| <= d
  static TaperWeight w2(double d1, double d2);  // 1, linear ramp, 0

  void validate() const;

  Kind kind = Kind::none;
  double d = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

double taper_eval(const TaperWeight& w, double delta);

/// Uniform grids for the cosine transform pair. The input curve lives on
/// {0, delta_step, ..., delta_max}; the spectrum on {0, theta_step, ..., theta_max}.
struct TransformGrid {
  double delta_step = 0.0;
  double delta_max = 0.0;
  double theta_step = 0.0;
  double theta_max = 0.0;

  /// theta_max = pi/delta_step (Nyquist cap), theta_step = pi/(4 delta_max).
  static TransformGrid defaults_for(double delta_step, double delta_max);

  std::size_t num_delta() const;
  std::size_t num_theta() const;
  std::vector<double> delta_points() const;
  std::vector<double> theta_points() const;

  void validate() const;
};

/// rho_plus(theta) = 2 int_0^delta_max rho(d) w(d) cos(theta d) dd by
/// trapezoid quadrature, evaluated on the theta grid. rho is tabulated on the
/// uniform delta grid (even extension implied).
std::vector<double> cosine_transform(std::span<const double> rho, const TaperWeight& w,
                                     const TransformGrid& grid);

/// PSD-adjusted curve. Tabulated on the input delta grid; `spectrum` holds the
/// clipped transform max(rho_plus, 0), which is the adjusted curve's transform
/// by construction. eval() computes the same quadrature form at arbitrary
/// lags, so correlation matrices built from it are PSD up to roundoff.
struct AdjustedCurve {
  std::vector<double> delta_grid;
  std::vector<double> values;           // rho_tilde on the delta grid
  std::vector<double> theta_grid;
  std::vector<double> spectrum;         // max(rho_plus, 0) on the theta grid
  std::vector<double> raw_spectrum;     // rho_plus before clipping
  double theta_step = 0.0;

  double eval(double delta) const;
  double at_zero() const { return values.empty() ? 0.0 : values.front(); }
};

/// Forward transform, clip negatives, inverse transform:
/// rho_tilde(d) = pi^-1 int_0^theta_max max(rho_plus, 0) cos(theta d) dtheta.
AdjustedCurve psd_adjust(std::span<const double> rho, const TaperWeight& w,
                         const TransformGrid& grid);

}  // namespace spatcorr
