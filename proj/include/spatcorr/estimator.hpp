#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "spatcorr/dataset.hpp"
#include "spatcorr/kernel.hpp"

namespace spatcorr {

/// Symmetrized covariance values on a lag grid. Grid points with no kernel
/// support carry quiet NaNs and missing = true instead of erroring.
struct CovarianceSurface {
  std::vector<double> delta_grid;
  std::vector<Eigen::MatrixXd> values;  // one m x m matrix per grid point
  std::vector<double> effective_weight; // A(delta) per grid point
  std::vector<bool> missing;
};

struct CorrelationCurve {
  std::vector<double> delta_grid;
  std::vector<double> rho;              // NaN where unsupported
  std::vector<bool> missing;
  Eigen::MatrixXd g_hat;                // m x m
  std::vector<double> sd;               // optional bootstrap band, empty if absent
  std::vector<double> rho_adjusted;     // optional PSD-adjusted companion
};

/// Point-evaluable kernel covariance estimator over centered residuals.
/// Immutable after construction; all evaluations are const and thread-safe.
class CovarianceEstimate {
 public:
  CovarianceEstimate(ResidualSet residuals, KernelSpec kernel,
                     double abs_lag_cap = std::numeric_limits<double>::infinity());

  /// Raw estimator over signed lags. x1/x2 are 0-based subunit indices.
  /// Throws Error(no_support_at_lag) when no pair falls inside the bandwidth.
  double raw(Eigen::Index x1, Eigen::Index x2, double delta) const;

  /// Symmetrized estimator; even in delta and symmetric in (x1, x2) exactly.
  double sym(Eigen::Index x1, Eigen::Index x2, double delta) const;
  std::optional<double> sym_opt(Eigen::Index x1, Eigen::Index x2, double delta) const;

  /// Ghat(x1,x2) = sym(x1,x2,0).
  Eigen::MatrixXd g_hat() const;

  /// rho_hat(delta): ratio of lower-triangular sums of sym at delta and 0.
  /// Throws no_support_at_lag / degenerate_g.
  double rho_hat(double delta) const;
  std::optional<double> rho_hat_opt(double delta) const;

  /// A(delta): raw kernel weight sum over ordered pairs, signed lags; >= 0.
  double pair_weight(double delta) const;

  CovarianceSurface render_surface(std::span<const double> delta_grid) const;
  CorrelationCurve correlation_curve(std::span<const double> delta_grid) const;

  const ResidualSet& residuals() const { return residuals_; }
  const KernelSpec& kernel() const { return kernel_; }
  Eigen::Index num_subunits() const { return residuals_.num_subunits; }
  double abs_lag_cap() const { return abs_lag_cap_; }
  long num_indexed_pairs() const;  // unordered pairs in the index

 private:
  struct PairEntry {
    double abs_lag;
    Eigen::Index hi;  // unit index with the larger location
    Eigen::Index lo;  // unit index with the smaller location
    double s_lower;   // sum_j sum_{l<=j} (e_hi,j e_lo,l + e_lo,j e_hi,l)
  };
  struct SubjectIndex {
    std::size_t subject;           // index into residuals_.subjects
    std::vector<PairEntry> pairs;  // sorted by abs_lag
  };

  struct RatioParts {
    double numerator;
    double denominator;
    double scale;  // kernel-weighted mean |summand|, for degeneracy detection
  };

  // Lower-triangular-sum ratio at |delta|; nullopt when unsupported.
  std::optional<RatioParts> lower_tri_ratio(double delta) const;

  void check_cap(double abs_delta, double h) const;

  ResidualSet residuals_;
  KernelSpec kernel_;
  double abs_lag_cap_;
  std::vector<SubjectIndex> index_;
  std::optional<RatioParts> zero_ratio_;  // cached lower_tri_ratio(0)
};

/// Convenience: center + estimate in one call.
CovarianceEstimate make_estimate(const Dataset& data, const KernelSpec& kernel,
                                 double abs_lag_cap = std::numeric_limits<double>::infinity());

}  // namespace spatcorr
