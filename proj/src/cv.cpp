#include "spatcorr/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spatcorr/errors.hpp"
#include "spatcorr/numeric.hpp"
#include "spatcorr/parallel.hpp"

namespace spatcorr {

namespace {

struct IndexedPair {
  double abs_lag;
  Eigen::Index hi;
  Eigen::Index lo;
  double s_lower;
};

/// Pair lists shared by every candidate evaluation.
struct CvContext {
  ResidualSet residuals;
  std::vector<std::vector<IndexedPair>> pairs;      // per subject, sorted by abs_lag
  std::vector<std::size_t> held_out_count;          // pairs with abs_lag < delta0
  Eigen::Index m = 0;

  CvContext(const Dataset& data, double delta0, double max_h) {
    data.validate();
    if (data.num_subjects() < 2)
      raise(errc::insufficient_subjects, "leave-one-subject-out needs at least 2 subjects");
    residuals = center_residuals(data);
    m = residuals.num_subunits;
    const double cap = delta0 + max_h;
    pairs.resize(residuals.subjects.size());
    held_out_count.resize(residuals.subjects.size());
    for (std::size_t r = 0; r < residuals.subjects.size(); ++r) {
      const auto& subj = residuals.subjects[r];
      const auto n = static_cast<Eigen::Index>(subj.unit_locations.size());
      auto& list = pairs[r];
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
          double lag = subj.unit_locations[a] - subj.unit_locations[b];
          double abs_lag = std::abs(lag);
          if (abs_lag > cap) continue;
          IndexedPair e;
          e.abs_lag = abs_lag;
          e.hi = lag >= 0.0 ? a : b;
          e.lo = lag >= 0.0 ? b : a;
          KahanSum s;
          double chi = 0.0, clo = 0.0;
          for (Eigen::Index j = 0; j < m; ++j) {
            chi += subj.residuals(e.hi, j);
            clo += subj.residuals(e.lo, j);
            s.add(subj.residuals(e.hi, j) * clo + subj.residuals(e.lo, j) * chi);
          }
          e.s_lower = s.value();
          list.push_back(e);
        }
      }
      std::sort(list.begin(), list.end(),
                [](const IndexedPair& x, const IndexedPair& y) { return x.abs_lag < y.abs_lag; });
      held_out_count[r] = static_cast<std::size_t>(
          std::lower_bound(list.begin(), list.end(), delta0,
                           [](const IndexedPair& p, double v) { return p.abs_lag < v; }) -
          list.begin());
    }
  }
};

struct WindowSums {
  Eigen::MatrixXd num;   // m x m kernel-weighted residual products
  double t_lower = 0.0;  // lower-triangular (s_lower) weighted sum
  double t_scale = 0.0;  // sum of w |s_lower|, for degeneracy detection
  double den = 0.0;      // symmetrized weight sum (2w per unordered pair)
  bool supported() const { return den > 0.0; }
};

/// Kernel sums at lag `delta` over every subject except `skip`, in subject
/// order. Accumulating subject-by-subject (never total-minus-held-out) keeps
/// leave-one-out exact: the held-out subject's values never enter.
WindowSums window_sums(const CvContext& ctx, std::size_t skip, double delta, KernelFamily family,
                       double h, bool with_matrix) {
  WindowSums out;
  const auto m = ctx.m;
  if (with_matrix) out.num = Eigen::MatrixXd::Zero(m, m);
  KahanSum t_lower, t_scale, den;
  Eigen::MatrixXd num_comp;
  if (with_matrix) num_comp = Eigen::MatrixXd::Zero(m, m);
  const double lo = delta > h ? delta - h : 0.0;
  const double hi = delta + h;
  for (std::size_t s = 0; s < ctx.pairs.size(); ++s) {
    if (s == skip) continue;
    const auto& e = ctx.residuals.subjects[s].residuals;
    const auto& list = ctx.pairs[s];
    auto first = std::lower_bound(list.begin(), list.end(), lo,
                                  [](const IndexedPair& p, double v) { return p.abs_lag <= v; });
    for (auto it = first; it != list.end() && it->abs_lag < hi; ++it) {
      double w = kernel_scaled(family, it->abs_lag - delta, h);
      t_lower.add(w * it->s_lower);
      t_scale.add(w * std::abs(it->s_lower));
      den.add(2.0 * w);
      if (with_matrix) {
        for (Eigen::Index j = 0; j < m; ++j) {
          for (Eigen::Index l = 0; l < m; ++l) {
            // Neumaier update per cell.
            double x = w * (e(it->hi, j) * e(it->lo, l) + e(it->lo, j) * e(it->hi, l));
            double& sum = out.num(j, l);
            double& comp = num_comp(j, l);
            double t = sum + x;
            if (std::abs(sum) >= std::abs(x)) {
              comp += (sum - t) + x;
            } else {
              comp += (x - t) + sum;
            }
            sum = t;
          }
        }
      }
    }
  }
  out.t_lower = t_lower.value();
  out.t_scale = t_scale.value();
  out.den = den.value();
  if (with_matrix && out.den > 0.0) out.num = (out.num + num_comp) / out.den;
  return out;
}

struct ScoreResult {
  double score = 0.0;
  long terms = 0;
  long skipped = 0;
};

ScoreResult score_impl(const CvContext& ctx, KernelFamily family, const BandwidthPolicy& bw,
                       double delta0, CvCriterion criterion) {
  const auto m = ctx.m;
  const long cells = 2L * m * m;  // ordered (pair, j, l) cells per unordered pair
  ScoreResult res;
  KahanSum score;
  for (std::size_t r = 0; r < ctx.pairs.size(); ++r) {
    const auto& subj = ctx.residuals.subjects[r];
    const std::size_t nheld = ctx.held_out_count[r];
    if (nheld == 0) continue;

    Eigen::MatrixXd g_minus_r;
    double rho_den = 0.0;
    bool subject_ok = true;
    if (criterion == CvCriterion::cv2) {
      auto zero = window_sums(ctx, r, 0.0, family, bw.at(0.0), true);
      if (!zero.supported() || std::abs(zero.t_lower) <= 1e-12 * zero.t_scale) {
        subject_ok = false;  // Ghat_(-r) unsupported or degenerate
      } else {
        g_minus_r = zero.num;
        rho_den = zero.t_lower / zero.den;
      }
    }

    for (std::size_t p = 0; p < nheld; ++p) {
      const auto& pair = ctx.pairs[r][p];
      if (criterion == CvCriterion::cv2 && !subject_ok) {
        res.skipped += cells;
        continue;
      }
      const double h = bw.at(pair.abs_lag);
      if (criterion == CvCriterion::cv1) {
        auto sums = window_sums(ctx, r, pair.abs_lag, family, h, true);
        if (!sums.supported()) {
          res.skipped += cells;
          continue;
        }
        KahanSum errs;
        for (Eigen::Index j = 0; j < m; ++j) {
          for (Eigen::Index l = 0; l < m; ++l) {
            double d = subj.residuals(pair.hi, j) * subj.residuals(pair.lo, l) - sums.num(j, l);
            errs.add(d * d);
          }
        }
        score.add(2.0 * errs.value());  // both ordered instances contribute equally
        res.terms += cells;
      } else {
        auto sums = window_sums(ctx, r, pair.abs_lag, family, h, false);
        if (!sums.supported()) {
          res.skipped += cells;
          continue;
        }
        double rho = (sums.t_lower / sums.den) / rho_den;
        KahanSum errs;
        for (Eigen::Index j = 0; j < m; ++j) {
          for (Eigen::Index l = 0; l < m; ++l) {
            double d = subj.residuals(pair.hi, j) * subj.residuals(pair.lo, l) -
                       g_minus_r(j, l) * rho;
            errs.add(d * d);
          }
        }
        score.add(2.0 * errs.value());
        res.terms += cells;
      }
    }
    (void)delta0;
  }
  res.score = score.value();
  return res;
}

CvRow make_row(double h_near, double h_far, const ScoreResult& s) {
  CvRow row;
  row.h_near = h_near;
  row.h_far = h_far;
  row.score = s.score;
  row.terms = s.terms;
  row.skipped = s.skipped;
  long total = s.terms + s.skipped;
  row.usable = s.terms > 0 && (total == 0 || static_cast<double>(s.skipped) <= 0.2 * total);
  return row;
}

void pick_best(CvReport& report) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (!row.usable) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& cur = report.rows[*best];
    if (row.score < cur.score) best = i;
    // Ties break toward the smaller bandwidth; rows are generated in
    // ascending (h_near, h_far) order, so strict < keeps the smaller one.
  }
  if (!best) raise(errc::no_usable_pairs, "every candidate produced an empty or unreliable score");
  report.best = best;
}

}  // namespace

const char* to_string(CvCriterion c) { return c == CvCriterion::cv1 ? "cv1" : "cv2"; }

std::vector<double> CvConfig::default_candidates(double delta0) {
  std::vector<double> out;
  const int n = 20;
  double lo = std::log(delta0 / 50.0);
  double hi = std::log(delta0 / 2.0);
  for (int i = 0; i < n; ++i) {
    out.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
  }
  return out;
}

void CvConfig::validate(bool two_regime) const {
  if (!(delta0 > 0.0)) raise(errc::invalid_input, "delta0 must be positive");
  if (two_regime) {
    if (candidates_near.empty() || candidates_far.empty())
      raise(errc::invalid_input, "two-regime search needs both candidate lists");
    for (double h : candidates_near)
      if (!(h > 0.0)) raise(errc::invalid_input, "candidate bandwidths must be positive");
    for (double h : candidates_far)
      if (!(h > 0.0)) raise(errc::invalid_input, "candidate bandwidths must be positive");
    if (!(split_delta > 0.0)) raise(errc::invalid_input, "split_delta must be positive");
  } else {
    if (candidates.empty()) raise(errc::invalid_input, "candidate list is empty");
    for (double h : candidates)
      if (!(h > 0.0)) raise(errc::invalid_input, "candidate bandwidths must be positive");
  }
}

const CvRow& CvReport::best_row() const {
  if (!best) raise(errc::no_usable_pairs, "report has no usable best row");
  return rows[*best];
}

std::string CvReport::to_tsv() const {
  std::ostringstream os;
  os << "h_near\th_far\tscore\tterms\tskipped\tusable\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.h_near << '\t' << r.h_far << '\t' << r.score << '\t' << r.terms << '\t' << r.skipped
       << '\t' << (r.usable ? 1 : 0) << '\n';
  }
  return os.str();
}

double cv1_score(const Dataset& data, KernelFamily family, const BandwidthPolicy& bandwidth,
                 const CvConfig& config, long* terms, long* skipped) {
  bandwidth.validate();
  if (!(config.delta0 > 0.0)) raise(errc::invalid_input, "delta0 must be positive");
  CvContext ctx(data, config.delta0, bandwidth.max_bandwidth());
  auto s = score_impl(ctx, family, bandwidth, config.delta0, CvCriterion::cv1);
  if (terms) *terms = s.terms;
  if (skipped) *skipped = s.skipped;
  return s.score;
}

double cv2_score(const Dataset& data, KernelFamily family, const BandwidthPolicy& bandwidth,
                 const CvConfig& config, long* terms, long* skipped) {
  bandwidth.validate();
  if (!(config.delta0 > 0.0)) raise(errc::invalid_input, "delta0 must be positive");
  CvContext ctx(data, config.delta0, bandwidth.max_bandwidth());
  auto s = score_impl(ctx, family, bandwidth, config.delta0, CvCriterion::cv2);
  if (terms) *terms = s.terms;
  if (skipped) *skipped = s.skipped;
  return s.score;
}

CvReport select_bandwidth(const Dataset& data, KernelFamily family, const CvConfig& config) {
  config.validate(false);
  auto candidates = config.candidates;
  std::sort(candidates.begin(), candidates.end());
  double max_h = candidates.back();
  CvContext ctx(data, config.delta0, max_h);

  CvReport report;
  report.criterion = config.criterion;
  report.delta0 = config.delta0;
  report.rows.resize(candidates.size());
  parallel_for(static_cast<long>(candidates.size()), config.num_threads, [&](long i) {
    auto bw = BandwidthPolicy::global(candidates[i]);
    auto s = score_impl(ctx, family, bw, config.delta0, config.criterion);
    report.rows[i] = make_row(candidates[i], candidates[i], s);
  });
  pick_best(report);
  return report;
}

CvReport select_two_regime(const Dataset& data, KernelFamily family, const CvConfig& config) {
  config.validate(true);
  auto near = config.candidates_near;
  auto far = config.candidates_far;
  std::sort(near.begin(), near.end());
  std::sort(far.begin(), far.end());
  double max_h = std::max(near.back(), far.back());
  CvContext ctx(data, config.delta0, max_h);

  CvReport report;
  report.criterion = config.criterion;
  report.delta0 = config.delta0;
  report.rows.resize(near.size() * far.size());
  parallel_for(static_cast<long>(report.rows.size()), config.num_threads, [&](long idx) {
    std::size_t a = static_cast<std::size_t>(idx) / far.size();
    std::size_t b = static_cast<std::size_t>(idx) % far.size();
    auto bw = BandwidthPolicy::two_regime(near[a], far[b], config.split_delta);
    auto s = score_impl(ctx, family, bw, config.delta0, config.criterion);
    report.rows[idx] = make_row(near[a], far[b], s);
  });
  pick_best(report);
  return report;
}

}  // namespace spatcorr
