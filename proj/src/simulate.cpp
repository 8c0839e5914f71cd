#include "spatcorr/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatcorr/errors.hpp"
#include "spatcorr/numeric.hpp"

namespace spatcorr {

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Cholesky with escalating diagonal jitter: 1e-10 * trace/n up to 1e-6 * trace/n.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& mat, const char* what) {
  const auto n = mat.rows();
  double scale = mat.trace() / static_cast<double>(n);
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(mat);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double jitter = 1e-10 * scale; jitter <= 1e-6 * scale * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd shifted = mat;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  raise(errc::invalid_correlation,
        std::string(what) + " is not positive semidefinite within the jitter budget");
}

}  // namespace

IntensityDensity IntensityDensity::uniform() { return IntensityDensity{}; }

IntensityDensity IntensityDensity::truncated_normal(double mu, double sigma) {
  IntensityDensity g;
  g.kind = Kind::truncated_normal;
  g.mu = mu;
  g.sigma = sigma;
  if (sigma > 0.0) g.trunc_norm_const = normal_cdf((1.0 - mu) / sigma) - normal_cdf(-mu / sigma);
  g.validate();
  return g;
}

IntensityDensity IntensityDensity::tabulated(std::vector<double> grid,
                                             std::vector<double> values) {
  IntensityDensity g;
  g.kind = Kind::tabulated;
  g.grid = std::move(grid);
  g.values = std::move(values);
  g.validate();
  // Renormalize exactly after the 1e-8 check so sampling sees total mass 1.
  double mass = 0.0;
  for (std::size_t i = 1; i < g.grid.size(); ++i) {
    mass += 0.5 * (g.values[i - 1] + g.values[i]) * (g.grid[i] - g.grid[i - 1]);
  }
  for (auto& v : g.values) v /= mass;
  return g;
}

void IntensityDensity::validate() const {
  switch (kind) {
    case Kind::uniform:
      return;
    case Kind::truncated_normal: {
      if (!(sigma > 0.0)) raise(errc::invalid_input, "truncated normal needs sigma > 0");
      if (!(trunc_norm_const > 0.0))
        raise(errc::invalid_input, "truncated normal has no mass on [0, 1]");
      // Density floor (assumption: g bounded away from zero). The minimum over
      // [0, 1] is at the endpoint farther from mu.
      double z0 = std::abs(0.0 - mu) > std::abs(1.0 - mu) ? 0.0 : 1.0;
      if (pdf(z0) < 1e-6)
        raise(errc::invalid_input, "truncated normal density falls below the 1e-6 floor on [0,1]");
      return;
    }
    case Kind::tabulated: {
      if (grid.size() < 2 || grid.size() != values.size())
        raise(errc::invalid_input, "tabulated density needs matching grid/values, length >= 2");
      if (grid.front() != 0.0 || grid.back() != 1.0)
        raise(errc::invalid_input, "tabulated density grid must span [0, 1]");
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]))
          raise(errc::invalid_input, "tabulated density grid must be strictly increasing");
      }
      double mass = 0.0;
      for (std::size_t i = 1; i < grid.size(); ++i) {
        mass += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
      }
      if (std::abs(mass - 1.0) > 1e-8)
        raise(errc::invalid_input, "tabulated density must integrate to 1 within 1e-8");
      for (double v : values) {
        if (!(v >= 1e-6))
          raise(errc::invalid_input, "tabulated density falls below the 1e-6 floor");
      }
      return;
    }
  }
}

double IntensityDensity::pdf(double t) const {
  if (t < 0.0 || t > 1.0) return 0.0;
  switch (kind) {
    case Kind::uniform:
      return 1.0;
    case Kind::truncated_normal:
      return normal_pdf((t - mu) / sigma) / (sigma * trunc_norm_const);
    case Kind::tabulated: {
      auto it = std::upper_bound(grid.begin(), grid.end(), t);
      std::size_t i = it == grid.begin() ? 1 : static_cast<std::size_t>(it - grid.begin());
      if (i >= grid.size()) i = grid.size() - 1;
      double w = grid[i] - grid[i - 1];
      double frac = (t - grid[i - 1]) / w;
      return values[i - 1] + frac * (values[i] - values[i - 1]);
    }
  }
  return 0.0;
}

double IntensityDensity::sample(RngStream& stream) const {
  switch (kind) {
    case Kind::uniform:
      return stream.uniform01();
    case Kind::truncated_normal: {
      // Rejection from the untruncated normal; acceptance is the truncation mass.
      for (;;) {
        double x = mu + sigma * stream.normal();
        if (x >= 0.0 && x <= 1.0) return x;
      }
    }
    case Kind::tabulated: {
      // Inverse CDF through the piecewise-linear density (CDF quadratic per cell).
      double u = stream.uniform01();
      double acc = 0.0;
      for (std::size_t i = 1; i < grid.size(); ++i) {
        double w = grid[i] - grid[i - 1];
        double a = values[i - 1], b = values[i];
        double cell = 0.5 * (a + b) * w;
        if (u <= acc + cell || i + 1 == grid.size()) {
          double target = std::max(0.0, u - acc);
          double s;
          if (std::abs(b - a) < 1e-14 * std::max(a, b)) {
            s = target / a;
          } else {
            double disc = a * a + 2.0 * (b - a) * target / w;
            s = w * (std::sqrt(std::max(0.0, disc)) - a) / (b - a);
          }
          return std::min(grid[i], grid[i - 1] + s);
        }
        acc += cell;
      }
      return 1.0;
    }
  }
  return 0.0;
}

CorrelationFunctionSpec CorrelationFunctionSpec::matern(double phi, double kappa) {
  CorrelationFunctionSpec s;
  s.kind = Kind::matern;
  s.phi = phi;
  s.kappa = kappa;
  s.validate();
  return s;
}

CorrelationFunctionSpec CorrelationFunctionSpec::sim3() {
  CorrelationFunctionSpec s;
  s.kind = Kind::sim3;
  return s;
}

CorrelationFunctionSpec CorrelationFunctionSpec::tabulated(std::vector<double> grid,
                                                           std::vector<double> values) {
  CorrelationFunctionSpec s;
  s.kind = Kind::tabulated;
  s.grid = std::move(grid);
  s.values = std::move(values);
  s.validate();
  // Fritsch-Carlson tangents: secant average, clamped to keep the interpolant
  // inside the data's local range (zero tangent at interior extrema).
  const std::size_t n = s.grid.size();
  s.slopes.assign(n, 0.0);
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    d[i] = (s.values[i + 1] - s.values[i]) / (s.grid[i + 1] - s.grid[i]);
  }
  s.slopes[0] = d[0];
  s.slopes[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      s.slopes[i] = 0.0;
    } else {
      s.slopes[i] = 0.5 * (d[i - 1] + d[i]);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      s.slopes[i] = 0.0;
      s.slopes[i + 1] = 0.0;
      continue;
    }
    double alpha = s.slopes[i] / d[i];
    double beta = s.slopes[i + 1] / d[i];
    double r = alpha * alpha + beta * beta;
    if (r > 9.0) {
      double tau = 3.0 / std::sqrt(r);
      s.slopes[i] = tau * alpha * d[i];
      s.slopes[i + 1] = tau * beta * d[i];
    }
  }
  return s;
}

void CorrelationFunctionSpec::validate() const {
  switch (kind) {
    case Kind::matern:
      if (!(phi > 0.0) || !(kappa > 0.0))
        raise(errc::invalid_input, "matern needs phi > 0 and kappa > 0");
      return;
    case Kind::sim3:
      return;
    case Kind::tabulated: {
      if (grid.size() < 2 || grid.size() != values.size())
        raise(errc::invalid_input, "tabulated correlation needs matching grid/values");
      if (grid.front() != 0.0)
        raise(errc::invalid_input, "tabulated correlation grid must start at 0");
      if (std::abs(values.front() - 1.0) > 1e-12)
        raise(errc::invalid_input, "tabulated correlation must equal 1 at lag 0");
      for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]))
          raise(errc::invalid_input, "tabulated correlation grid must be strictly increasing");
      }
      for (double v : values) {
        if (!(v >= -1.0 && v <= 1.0))
          raise(errc::invalid_input, "tabulated correlation values must lie in [-1, 1]");
      }
      return;
    }
  }
}

double CorrelationFunctionSpec::eval(double delta) const {
  double a = std::abs(delta);
  switch (kind) {
    case Kind::matern:
      return spatcorr::matern(a, phi, kappa);
    case Kind::sim3:
      return sim3_rho(a);
    case Kind::tabulated: {
      if (a >= grid.back()) return values.back();  // clamp beyond the table
      auto it = std::upper_bound(grid.begin(), grid.end(), a);
      std::size_t i = static_cast<std::size_t>(it - grid.begin());
      if (i == 0) return values.front();
      double w = grid[i] - grid[i - 1];
      double t = (a - grid[i - 1]) / w;
      double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
      double h10 = t * (1.0 - t) * (1.0 - t);
      double h01 = t * t * (3.0 - 2.0 * t);
      double h11 = t * t * (t - 1.0);
      return h00 * values[i - 1] + h10 * w * slopes[i - 1] + h01 * values[i] +
             h11 * w * slopes[i];
    }
  }
  return 0.0;
}

std::optional<double> CorrelationFunctionSpec::second_derivative_closed_form(double delta) const {
  if (kind != Kind::matern || kappa <= 1.0) return std::nullopt;
  double a = std::abs(delta);
  if (a == 0.0) return -1.0 / (2.0 * (kappa - 1.0) * phi * phi);
  double t = a / phi;
  if (t > 690.0) return 0.0;  // K_nu underflows; curvature is numerically zero
  // With f(t) = C t^k K_k(t): f'(t) = -C t^k K_{k-1}(t) and
  // f''(t) = -C [k t^{k-1} K_{k-1}(t) - t^k (K_{k-2}(t) + K_k(t)) / 2].
  double c = std::pow(2.0, 1.0 - kappa) / std::tgamma(kappa);
  double km1 = std::cyl_bessel_k(std::abs(kappa - 1.0), t);
  double km2 = std::cyl_bessel_k(std::abs(kappa - 2.0), t);
  double k0 = std::cyl_bessel_k(kappa, t);
  double fpp = -c * (kappa * std::pow(t, kappa - 1.0) * km1 -
                     std::pow(t, kappa) * 0.5 * (km2 + k0));
  return fpp / (phi * phi);
}

double CorrelationFunctionSpec::lag_scale() const {
  switch (kind) {
    case Kind::matern:
      return phi;
    case Kind::sim3:
      return 100.0;
    case Kind::tabulated:
      return (grid.back() - grid.front()) / 4.0;
  }
  return 1.0;
}

bool CorrelationFunctionSpec::twice_differentiable_at_zero() const {
  return kind == Kind::matern && kappa > 1.0;
}

std::vector<double> sample_locations(double nu, double L, const IntensityDensity& g,
                                     RngStream& stream) {
  if (!(nu > 0.0) || !(L > 0.0)) raise(errc::invalid_input, "need nu > 0 and L > 0");
  g.validate();
  long n = stream.poisson(nu * L);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = g.sample(stream) * L;
  std::sort(out.begin(), out.end());
  return out;
}

double matern(double delta, double phi, double kappa) {
  if (!(phi > 0.0) || !(kappa > 0.0)) raise(errc::invalid_input, "matern needs phi, kappa > 0");
  if (!(delta >= 0.0)) raise(errc::invalid_input, "matern needs delta >= 0");
  double t = delta / phi;
  if (t == 0.0) return 1.0;
  if (kappa == 0.5) return std::exp(-t);
  if (kappa == 1.5) return (1.0 + t) * std::exp(-t);
  if (kappa == 2.5) return (1.0 + t + t * t / 3.0) * std::exp(-t);
  if (t > 690.0) return 0.0;  // K_kappa underflows
  return std::pow(2.0, 1.0 - kappa) / std::tgamma(kappa) * std::pow(t, kappa) *
         std::cyl_bessel_k(kappa, t);
}

double sim3_rho(double delta) {
  double a = std::abs(delta);
  return 0.5 * std::cos(a / 60.0) / (1.0 + a / 100.0) + 0.5 * std::exp(-a / 800.0);
}

void RandomFieldModel::validate() const {
  if (g.rows() == 0 || g.rows() != g.cols())
    raise(errc::invalid_input, "G must be a nonempty square matrix");
  if (!g.isApprox(g.transpose(), 1e-12)) raise(errc::invalid_input, "G must be symmetric");
  cholesky_with_jitter(g, "G");
  rho.validate();
  if (std::abs(rho.eval(0.0) - 1.0) > 1e-12)
    raise(errc::invalid_input, "rho(0) must equal 1");
  if (!(sigma_eps >= 0.0)) raise(errc::invalid_input, "sigma_eps must be >= 0");
  if (!(process.nu > 0.0) || !(process.L > 0.0))
    raise(errc::invalid_input, "process needs nu > 0 and L > 0");
  process.density.validate();
}

Eigen::MatrixXd sample_field(const RandomFieldModel& model, std::span<const double> locations,
                             RngStream& stream) {
  const auto n = static_cast<Eigen::Index>(locations.size());
  if (n < 1) raise(errc::invalid_input, "sample_field needs at least one location");
  {
    std::vector<double> sorted(locations.begin(), locations.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      raise(errc::invalid_input, "sample_field needs distinct locations");
  }
  const auto m = model.g.rows();
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index k = 0; k < i; ++k) {
      double v = model.rho.eval(std::abs(locations[i] - locations[k]));
      corr(i, k) = v;
      corr(k, i) = v;
    }
  }
  Eigen::MatrixXd l_rho = cholesky_with_jitter(corr, "unit correlation matrix");
  Eigen::MatrixXd l_g = cholesky_with_jitter(model.g, "G");

  Eigen::MatrixXd z(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = stream.normal();
  }
  Eigen::MatrixXd y = l_rho * z * l_g.transpose();
  if (model.sigma_eps > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) y(i, j) += model.sigma_eps * stream.normal();
    }
  }
  return y;
}

Eigen::MatrixXd empirical_g(const Dataset& data) {
  data.validate();
  long total = data.total_units();
  if (total < 1) raise(errc::invalid_input, "empirical G needs at least one unit");
  const auto m = data.num_subunits();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  for (const auto& s : data.subjects) {
    if (s.num_units() == 0) continue;
    Eigen::VectorXd mean = s.responses.colwise().mean();
    Eigen::MatrixXd centered = s.responses.rowwise() - mean.transpose();
    acc.noalias() += centered.transpose() * centered;
  }
  return acc / static_cast<double>(total);
}

double noise_variance_estimate(const Eigen::MatrixXd& g_star, const Eigen::MatrixXd& g_hat) {
  if (g_star.rows() != g_hat.rows() || g_star.cols() != g_hat.cols())
    raise(errc::invalid_input, "G* and Ghat must have the same shape");
  return (g_star.diagonal() - g_hat.diagonal()).mean();
}

std::vector<double> asymptotic_bias_rho(const CorrelationFunctionSpec& rho, double h,
                                        KernelFamily family, std::span<const double> deltas,
                                        bool force_finite_difference) {
  rho.validate();
  if (!(h > 0.0)) raise(errc::invalid_input, "bandwidth must be positive");
  if (!rho.twice_differentiable_at_zero())
    raise(errc::bias_undefined,
          "correlation spec lacks two derivatives at lag 0 (needs e.g. matern kappa > 1)");
  const double s2k = kernel_moments(family).sigma_k_sq;
  const double fd_step = 1e-3 * rho.lag_scale();
  auto second = [&](double d) {
    if (!force_finite_difference) {
      auto cf = rho.second_derivative_closed_form(d);
      if (cf) return *cf;
    }
    // Central difference on the even extension.
    return (rho.eval(d + fd_step) - 2.0 * rho.eval(d) + rho.eval(d - fd_step)) /
           (fd_step * fd_step);
  };
  const double rpp0 = second(0.0);
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double d : deltas) {
    double rpp = second(d);
    out.push_back((rpp - rho.eval(d) * rpp0) * s2k * h * h / 2.0);
  }
  return out;
}

double f1_at_zero(const IntensityDensity& g) {
  g.validate();
  if (g.kind == IntensityDensity::Kind::uniform) return 1.0;
  if (g.kind == IntensityDensity::Kind::tabulated) {
    // Exact integral of the squared piecewise-linear density.
    double acc = 0.0;
    for (std::size_t i = 1; i < g.grid.size(); ++i) {
      double w = g.grid[i] - g.grid[i - 1];
      double a = g.values[i - 1], b = g.values[i];
      acc += w * (a * a + a * b + b * b) / 3.0;
    }
    return acc;
  }
  // Trapezoid with doubling resolution until successive estimates agree to 1e-8.
  auto integral = [&](std::size_t n) {
    KahanSum s;
    for (std::size_t i = 0; i <= n; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(n);
      double v = g.pdf(t);
      s.add((i == 0 || i == n ? 0.5 : 1.0) * v * v);
    }
    return s.value() / static_cast<double>(n);
  };
  double prev = integral(512);
  for (std::size_t n = 1024; n <= (1u << 22); n *= 2) {
    double cur = integral(n);
    if (std::abs(cur - prev) <= 1e-8 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

double imse(std::span<const double> delta_grid, std::span<const double> estimate,
            const CorrelationFunctionSpec& truth, double range_lo, double range_hi) {
  if (delta_grid.size() != estimate.size() || delta_grid.size() < 2)
    raise(errc::invalid_input, "estimate and grid must match, length >= 2");
  if (!(range_hi > range_lo)) raise(errc::invalid_input, "empty IMSE range");
  if (delta_grid.front() > range_lo + 1e-12 || delta_grid.back() < range_hi - 1e-12)
    raise(errc::invalid_input, "tabulation grid does not cover the IMSE range");
  // Integrate the piecewise-linear interpolant of the squared error.
  std::vector<double> err2(delta_grid.size());
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!std::isfinite(estimate[i]) && delta_grid[i] >= range_lo - 1e-12 &&
        delta_grid[i] <= range_hi + 1e-12)
      raise(errc::invalid_input, "estimate is undefined inside the IMSE range");
    double d = estimate[i] - truth.eval(delta_grid[i]);
    err2[i] = d * d;
  }
  auto value_at = [&](double x) {
    auto it = std::upper_bound(delta_grid.begin(), delta_grid.end(), x);
    std::size_t i = it == delta_grid.begin() ? 1 : static_cast<std::size_t>(it - delta_grid.begin());
    if (i >= delta_grid.size()) i = delta_grid.size() - 1;
    double t = (x - delta_grid[i - 1]) / (delta_grid[i] - delta_grid[i - 1]);
    return err2[i - 1] + t * (err2[i] - err2[i - 1]);
  };
  KahanSum acc;
  double prev_x = range_lo;
  double prev_v = value_at(range_lo);
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    double x = delta_grid[i];
    if (x <= range_lo || x >= range_hi) continue;
    acc.add(0.5 * (prev_v + err2[i]) * (x - prev_x));
    prev_x = x;
    prev_v = err2[i];
  }
  acc.add(0.5 * (prev_v + value_at(range_hi)) * (range_hi - prev_x));
  return acc.value();
}

}  // namespace spatcorr
