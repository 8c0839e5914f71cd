#include "spatcorr/psd.hpp"

#include <cmath>
#include <numbers>

#include "spatcorr/errors.hpp"
#include "spatcorr/numeric.hpp"

namespace spatcorr {

namespace {
constexpr double kPi = std::numbers::pi;
}

TaperWeight TaperWeight::none() { return TaperWeight{}; }

TaperWeight TaperWeight::w1(double d) {
  TaperWeight w;
  w.kind = Kind::w1;
  w.d = d;
  return w;
}

TaperWeight TaperWeight::w2(double d1, double d2) {
  TaperWeight w;
  w.kind = Kind::w2;
  w.d1 = d1;
  w.d2 = d2;
  return w;
}

void TaperWeight::validate() const {
  switch (kind) {
    case Kind::none:
      return;
    case Kind::w1:
      if (!(d > 0.0)) raise(errc::invalid_input, "w1 taper needs D > 0");
      return;
    case Kind::w2:
      if (!(d1 > 0.0) || !(d2 >= d1)) raise(errc::invalid_input, "w2 taper needs 0 < D1 <= D2");
      return;
  }
}

double taper_eval(const TaperWeight& w, double delta) {
  double a = std::abs(delta);
  switch (w.kind) {
    case TaperWeight::Kind::none:
      return 1.0;
    case TaperWeight::Kind::w1:
      return a <= w.d ? 1.0 : 0.0;
    case TaperWeight::Kind::w2:
      if (a < w.d1) return 1.0;
      if (a > w.d2) return 0.0;
      if (w.d2 == w.d1) return 0.0;  // degenerate ramp: treat the knee as cut
      return (w.d2 - a) / (w.d2 - w.d1);
  }
  return 1.0;
}

TransformGrid TransformGrid::defaults_for(double delta_step, double delta_max) {
  TransformGrid g;
  g.delta_step = delta_step;
  g.delta_max = delta_max;
  g.theta_max = kPi / delta_step;       // Nyquist-style cap
  g.theta_step = kPi / (4.0 * delta_max);
  return g;
}

std::size_t TransformGrid::num_delta() const {
  return static_cast<std::size_t>(std::llround(delta_max / delta_step)) + 1;
}

std::size_t TransformGrid::num_theta() const {
  return static_cast<std::size_t>(std::floor(theta_max / theta_step * (1.0 + 1e-12))) + 1;
}

std::vector<double> TransformGrid::delta_points() const {
  std::vector<double> out(num_delta());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(i) * delta_step;
  return out;
}

std::vector<double> TransformGrid::theta_points() const {
  std::vector<double> out(num_theta());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(i) * theta_step;
  return out;
}

void TransformGrid::validate() const {
  if (!(delta_step > 0.0) || !(delta_max > 0.0) || !(theta_step > 0.0) || !(theta_max > 0.0))
    raise(errc::invalid_input, "transform grid values must be positive");
  double cells = delta_max / delta_step;
  if (std::abs(cells - std::llround(cells)) > 1e-6)
    raise(errc::invalid_input, "delta_max must be an integer multiple of delta_step");
  // Resolution constraints: the theta spacing must resolve cos(theta delta_max)
  // and the delta spacing must resolve cos(theta_max delta).
  if (theta_step * delta_max > kPi / 4.0 * (1.0 + 1e-9))
    raise(errc::invalid_input, "theta_step too coarse: theta_step * delta_max must be <= pi/4");
  if (theta_max * delta_step > kPi * (1.0 + 1e-9))
    raise(errc::invalid_input, "theta_max beyond Nyquist: theta_max * delta_step must be <= pi");
}

namespace {

void check_inputs(std::span<const double> rho, const TaperWeight& w, const TransformGrid& grid) {
  grid.validate();
  w.validate();
  if (rho.size() != grid.num_delta())
    raise(errc::invalid_input, "curve length does not match the transform grid");
  if (taper_eval(w, grid.delta_max) != 0.0 && w.kind != TaperWeight::Kind::none)
    raise(errc::taper_exceeds_grid, "taper weight is nonzero at delta_max");
}

}  // namespace

std::vector<double> cosine_transform(std::span<const double> rho, const TaperWeight& w,
                                     const TransformGrid& grid) {
  check_inputs(rho, w, grid);
  const std::size_t nd = grid.num_delta();
  const std::size_t nt = grid.num_theta();
  // Tapered, trapezoid-weighted integrand; endpoints carry half weight.
  std::vector<double> f(nd);
  for (std::size_t n = 0; n < nd; ++n) {
    double d = static_cast<double>(n) * grid.delta_step;
    double tw = (n == 0 || n + 1 == nd) ? 0.5 : 1.0;
    f[n] = rho[n] * taper_eval(w, d) * tw;
  }
  std::vector<double> out(nt);
  for (std::size_t q = 0; q < nt; ++q) {
    double theta = static_cast<double>(q) * grid.theta_step;
    KahanSum s;
    for (std::size_t n = 0; n < nd; ++n) {
      s.add(f[n] * std::cos(theta * static_cast<double>(n) * grid.delta_step));
    }
    out[q] = 2.0 * grid.delta_step * s.value();
  }
  return out;
}

AdjustedCurve psd_adjust(std::span<const double> rho, const TaperWeight& w,
                         const TransformGrid& grid) {
  AdjustedCurve out;
  out.raw_spectrum = cosine_transform(rho, w, grid);
  out.theta_grid = grid.theta_points();
  out.theta_step = grid.theta_step;
  out.spectrum.resize(out.raw_spectrum.size());
  for (std::size_t q = 0; q < out.spectrum.size(); ++q) {
    out.spectrum[q] = out.raw_spectrum[q] > 0.0 ? out.raw_spectrum[q] : 0.0;
  }
  out.delta_grid = grid.delta_points();
  out.values.resize(out.delta_grid.size());
  for (std::size_t n = 0; n < out.delta_grid.size(); ++n) {
    out.values[n] = out.eval(out.delta_grid[n]);
  }
  return out;
}

double AdjustedCurve::eval(double delta) const {
  // (2 pi)^-1 integral over (-theta_max, theta_max) equals pi^-1 over [0, theta_max].
  KahanSum s;
  const std::size_t nt = spectrum.size();
  for (std::size_t q = 0; q < nt; ++q) {
    double tw = (q == 0 || q + 1 == nt) ? 0.5 : 1.0;
    s.add(tw * spectrum[q] * std::cos(theta_grid[q] * delta));
  }
  return theta_step / kPi * s.value();
}

}  // namespace spatcorr
