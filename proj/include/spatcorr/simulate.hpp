#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "spatcorr/dataset.hpp"
#include "spatcorr/kernel.hpp"
#include "spatcorr/rng.hpp"

namespace spatcorr {

/// Sampling density g on [0, 1] for unit locations; bounded away from zero
/// (floor 1e-6) and integrating to one within 1e-8.
struct IntensityDensity {
  enum class Kind { uniform, truncated_normal, tabulated };

  static IntensityDensity uniform();
  static IntensityDensity truncated_normal(double mu, double sigma);
  static IntensityDensity tabulated(std::vector<double> grid, std::vector<double> values);

  double pdf(double t) const;           // density at t in [0, 1]
  double sample(RngStream& stream) const;
  void validate() const;

  Kind kind = Kind::uniform;
  double mu = 0.0;
  double sigma = 0.0;
  double trunc_norm_const = 1.0;        // normalizing mass of N(mu, sigma) on [0, 1]
  std::vector<double> grid;             // tabulated support points (strictly increasing)
  std::vector<double> values;           // tabulated density values (renormalized)
};

/// Unit-level stationary correlation function.
struct CorrelationFunctionSpec {
  enum class Kind { matern, sim3, tabulated };

  static CorrelationFunctionSpec matern(double phi, double kappa);
  static CorrelationFunctionSpec sim3();
  /// Tabulated correlation with monotone-cubic (Fritsch-Carlson) interpolation.
  static CorrelationFunctionSpec tabulated(std::vector<double> grid, std::vector<double> values);

  double eval(double delta) const;
  /// Closed-form second derivative where registered (Matern with kappa > 1).
  std::optional<double> second_derivative_closed_form(double delta) const;
  /// Characteristic lag scale, used to pick finite-difference steps.
  double lag_scale() const;
  bool twice_differentiable_at_zero() const;
  void validate() const;

  Kind kind = Kind::matern;
  double phi = 1.0;
  double kappa = 0.5;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> slopes;  // Fritsch-Carlson tangents for tabulated specs
};

struct PoissonProcessSpec {
  double nu = 0.0;  // intensity scale; N ~ Poisson(nu * L)
  double L = 0.0;
  IntensityDensity density;

  double expected_units() const { return nu * L; }
};

/// Separable random field model: cov{Y(s1,x1), Y(s2,x2)} = G(x1,x2) rho(s1-s2)
/// plus measurement noise with sd sigma_eps on the diagonal.
struct RandomFieldModel {
  Eigen::MatrixXd g;  // m x m, PSD
  CorrelationFunctionSpec rho;
  double sigma_eps = 0.0;
  PoissonProcessSpec process;

  void validate() const;
};

/// N ~ Poisson(nu L); locations i.i.d. with density g, scaled to [0, L]; sorted.
std::vector<double> sample_locations(double nu, double L, const IntensityDensity& g,
                                     RngStream& stream);

/// Matern correlation {2^{k-1} Gamma(k)}^-1 (d/phi)^k K_k(d/phi); 1 at d = 0.
double matern(double delta, double phi, double kappa);

/// cos(d/60)/(2(1+|d|/100)) + exp(-|d|/800)/2.
double sim3_rho(double delta);

/// Draws one subject's N x m response matrix: Theta = L_rho Z L_G^T plus
/// i.i.d. noise, so second moments follow the separable product form.
/// Throws Error(invalid_correlation) if the unit correlation matrix fails
/// Cholesky within the jitter budget.
Eigen::MatrixXd sample_field(const RandomFieldModel& model, std::span<const double> locations,
                             RngStream& stream);

/// Pooled centered second-moment matrix G*(x1,x2).
Eigen::MatrixXd empirical_g(const Dataset& data);

/// Mean over the diagonal of (G* - Ghat); may be negative.
double noise_variance_estimate(const Eigen::MatrixXd& g_star, const Eigen::MatrixXd& g_hat);

/// Asymptotic bias of rho_hat: {rho''(d) - rho(d) rho''(0)} sigma_K^2 h^2 / 2.
/// Uses the registered closed form for rho'' when available unless
/// force_finite_difference; otherwise central differences with step
/// 1e-3 x lag scale. Throws Error(bias_undefined) for specs lacking two
/// derivatives at zero (Matern kappa <= 1, Sim3).
std::vector<double> asymptotic_bias_rho(const CorrelationFunctionSpec& rho, double h,
                                        KernelFamily family, std::span<const double> deltas,
                                        bool force_finite_difference = false);

/// f1(0) = int_0^1 g(t)^2 dt by adaptive-resolution trapezoid to 1e-8.
double f1_at_zero(const IntensityDensity& g);

/// Trapezoid integral of (estimate - truth)^2 over [range_lo, range_hi];
/// the tabulated grid must cover the range.
double imse(std::span<const double> delta_grid, std::span<const double> estimate,
            const CorrelationFunctionSpec& truth, double range_lo, double range_hi);

}  // namespace spatcorr
