#include "spatcorr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spatcorr/errors.hpp"
#include "spatcorr/numeric.hpp"

namespace spatcorr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lag_message(double delta, double h) {
  return "no pair within bandwidth " + std::to_string(h) + " of lag " + std::to_string(delta);
}

}  // namespace

CovarianceEstimate::CovarianceEstimate(ResidualSet residuals, KernelSpec kernel,
                                       double abs_lag_cap)
    : residuals_(std::move(residuals)), kernel_(kernel), abs_lag_cap_(abs_lag_cap) {
  kernel_.validate();
  if (!(abs_lag_cap_ > 0.0)) raise(errc::invalid_input, "lag cap must be positive");
  index_.reserve(residuals_.subjects.size());
  const auto m = residuals_.num_subunits;
  for (std::size_t r = 0; r < residuals_.subjects.size(); ++r) {
    const auto& subj = residuals_.subjects[r];
    SubjectIndex si;
    si.subject = r;
    const auto n = static_cast<Eigen::Index>(subj.unit_locations.size());
    si.pairs.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = a + 1; b < n; ++b) {
        double lag = subj.unit_locations[a] - subj.unit_locations[b];
        double abs_lag = std::abs(lag);
        if (abs_lag > abs_lag_cap_) continue;
        PairEntry e;
        e.abs_lag = abs_lag;
        e.hi = lag >= 0.0 ? a : b;  // location order; duplicates were rejected upstream
        e.lo = lag >= 0.0 ? b : a;
        // s_lower = sum_j sum_{l<=j} (e_hi[j] e_lo[l] + e_lo[j] e_hi[l]),
        // the lower-triangular sum both ordered instances contribute.
        KahanSum s;
        double chi = 0.0, clo = 0.0;  // running prefix sums over l
        for (Eigen::Index j = 0; j < m; ++j) {
          chi += subj.residuals(e.hi, j);
          clo += subj.residuals(e.lo, j);
          s.add(subj.residuals(e.hi, j) * clo + subj.residuals(e.lo, j) * chi);
        }
        e.s_lower = s.value();
        si.pairs.push_back(e);
      }
    }
    std::sort(si.pairs.begin(), si.pairs.end(),
              [](const PairEntry& x, const PairEntry& y) { return x.abs_lag < y.abs_lag; });
    index_.push_back(std::move(si));
  }
  zero_ratio_ = lower_tri_ratio(0.0);
}

long CovarianceEstimate::num_indexed_pairs() const {
  long n = 0;
  for (const auto& si : index_) n += static_cast<long>(si.pairs.size());
  return n;
}

void CovarianceEstimate::check_cap(double abs_delta, double h) const {
  if (abs_delta + h > abs_lag_cap_)
    raise(errc::invalid_input,
          "query lag " + std::to_string(abs_delta) + " + bandwidth exceeds the pair index cap");
}

double CovarianceEstimate::raw(Eigen::Index x1, Eigen::Index x2, double delta) const {
  const double h = kernel_.bandwidth.at(std::abs(delta));
  check_cap(std::abs(delta), h);
  const double lo = std::abs(delta) > h ? std::abs(delta) - h : 0.0;
  const double hi = std::abs(delta) + h;
  KahanSum num, den;
  for (const auto& si : index_) {
    const auto& e = residuals_.subjects[si.subject].residuals;
    auto first = std::lower_bound(si.pairs.begin(), si.pairs.end(), lo,
                                  [](const PairEntry& p, double v) { return p.abs_lag <= v; });
    for (auto it = first; it != si.pairs.end() && it->abs_lag < hi; ++it) {
      // Ordered instances (hi,lo) at +abs_lag and (lo,hi) at -abs_lag are
      // accumulated as one unit so that raw(x1,x2,delta) == raw(x2,x1,-delta)
      // holds bitwise.
      double wp = kernel_scaled(kernel_.family, it->abs_lag - delta, h);
      double wm = kernel_scaled(kernel_.family, -it->abs_lag - delta, h);
      num.add(wp * (e(it->hi, x1) * e(it->lo, x2)) + wm * (e(it->lo, x1) * e(it->hi, x2)));
      den.add(wp + wm);
    }
  }
  double d = den.value();
  if (!(d > 0.0)) raise(errc::no_support_at_lag, lag_message(delta, h));
  return num.value() / d;
}

std::optional<double> CovarianceEstimate::sym_opt(Eigen::Index x1, Eigen::Index x2,
                                                  double delta) const {
  const double ad = std::abs(delta);
  const double h = kernel_.bandwidth.at(ad);
  check_cap(ad, h);
  const double lo = ad > h ? ad - h : 0.0;
  const double hi = ad + h;
  KahanSum num, den;
  for (const auto& si : index_) {
    const auto& e = residuals_.subjects[si.subject].residuals;
    auto first = std::lower_bound(si.pairs.begin(), si.pairs.end(), lo,
                                  [](const PairEntry& p, double v) { return p.abs_lag <= v; });
    for (auto it = first; it != si.pairs.end() && it->abs_lag < hi; ++it) {
      double w = kernel_scaled(kernel_.family, it->abs_lag - ad, h);
      num.add(w * (e(it->hi, x1) * e(it->lo, x2) + e(it->lo, x1) * e(it->hi, x2)));
      den.add(2.0 * w);
    }
  }
  double d = den.value();
  if (!(d > 0.0)) return std::nullopt;
  return num.value() / d;
}

double CovarianceEstimate::sym(Eigen::Index x1, Eigen::Index x2, double delta) const {
  auto v = sym_opt(x1, x2, delta);
  if (!v) raise(errc::no_support_at_lag, lag_message(delta, kernel_.bandwidth.at(std::abs(delta))));
  return *v;
}

Eigen::MatrixXd CovarianceEstimate::g_hat() const {
  const auto m = num_subunits();
  Eigen::MatrixXd g(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      double v = sym(a, b, 0.0);
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return g;
}

std::optional<CovarianceEstimate::RatioParts> CovarianceEstimate::lower_tri_ratio(
    double delta) const {
  const double ad = std::abs(delta);
  const double h = kernel_.bandwidth.at(ad);
  check_cap(ad, h);
  const double lo = ad > h ? ad - h : 0.0;
  const double hi = ad + h;
  KahanSum num, den, mag;
  for (const auto& si : index_) {
    auto first = std::lower_bound(si.pairs.begin(), si.pairs.end(), lo,
                                  [](const PairEntry& p, double v) { return p.abs_lag <= v; });
    for (auto it = first; it != si.pairs.end() && it->abs_lag < hi; ++it) {
      double w = kernel_scaled(kernel_.family, it->abs_lag - ad, h);
      num.add(w * it->s_lower);
      mag.add(w * std::abs(it->s_lower));
      den.add(2.0 * w);
    }
  }
  double d = den.value();
  if (!(d > 0.0)) return std::nullopt;
  return RatioParts{num.value() / d, d, mag.value() / d};
}

std::optional<double> CovarianceEstimate::rho_hat_opt(double delta) const {
  auto at_delta = lower_tri_ratio(delta);
  if (!at_delta) return std::nullopt;
  if (!zero_ratio_) return std::nullopt;
  if (std::abs(zero_ratio_->numerator) <= 1e-12 * zero_ratio_->scale)
    raise(errc::degenerate_g, "lower-triangular sum of Ghat is zero or near zero");
  return at_delta->numerator / zero_ratio_->numerator;
}

double CovarianceEstimate::rho_hat(double delta) const {
  auto v = rho_hat_opt(delta);
  if (!v)
    raise(errc::no_support_at_lag,
          lag_message(delta, kernel_.bandwidth.at(std::abs(delta))));
  return *v;
}

double CovarianceEstimate::pair_weight(double delta) const {
  const double ad = std::abs(delta);
  const double h = kernel_.bandwidth.at(ad);
  check_cap(ad, h);
  const double lo = ad > h ? ad - h : 0.0;
  const double hi = ad + h;
  KahanSum sum;
  for (const auto& si : index_) {
    auto first = std::lower_bound(si.pairs.begin(), si.pairs.end(), lo,
                                  [](const PairEntry& p, double v) { return p.abs_lag <= v; });
    for (auto it = first; it != si.pairs.end() && it->abs_lag < hi; ++it) {
      sum.add(kernel_scaled(kernel_.family, it->abs_lag - delta, h) +
              kernel_scaled(kernel_.family, -it->abs_lag - delta, h));
    }
  }
  return sum.value();
}

CovarianceSurface CovarianceEstimate::render_surface(std::span<const double> delta_grid) const {
  if (delta_grid.empty()) raise(errc::invalid_input, "delta grid is empty");
  const auto m = num_subunits();
  CovarianceSurface out;
  out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  out.values.resize(delta_grid.size());
  out.effective_weight.resize(delta_grid.size());
  out.missing.resize(delta_grid.size());
  for (std::size_t q = 0; q < delta_grid.size(); ++q) {
    Eigen::MatrixXd v(m, m);
    bool missing = false;
    for (Eigen::Index a = 0; a < m && !missing; ++a) {
      for (Eigen::Index b = 0; b <= a; ++b) {
        auto val = sym_opt(a, b, delta_grid[q]);
        if (!val) {
          missing = true;
          break;
        }
        v(a, b) = *val;
        v(b, a) = *val;
      }
    }
    if (missing) v.setConstant(kNaN);
    out.values[q] = std::move(v);
    out.effective_weight[q] = pair_weight(delta_grid[q]);
    out.missing[q] = missing;
  }
  return out;
}

CorrelationCurve CovarianceEstimate::correlation_curve(std::span<const double> delta_grid) const {
  if (delta_grid.empty()) raise(errc::invalid_input, "delta grid is empty");
  CorrelationCurve out;
  out.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  out.rho.resize(delta_grid.size(), kNaN);
  out.missing.resize(delta_grid.size(), true);
  out.g_hat = g_hat();
  for (std::size_t q = 0; q < delta_grid.size(); ++q) {
    auto v = rho_hat_opt(delta_grid[q]);
    if (v) {
      out.rho[q] = *v;
      out.missing[q] = false;
    }
  }
  return out;
}

CovarianceEstimate make_estimate(const Dataset& data, const KernelSpec& kernel,
                                 double abs_lag_cap) {
  data.validate();
  return CovarianceEstimate(center_residuals(data), kernel, abs_lag_cap);
}

}  // namespace spatcorr
