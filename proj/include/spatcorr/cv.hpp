#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spatcorr/dataset.hpp"
#include "spatcorr/kernel.hpp"

namespace spatcorr {

enum class CvCriterion { cv1, cv2 };

const char* to_string(CvCriterion c);

struct CvConfig {
  double delta0 = 0.0;                    // lag cut-off for the CV sums
  std::vector<double> candidates;         // global bandwidths
  std::vector<double> candidates_near;    // two-regime search, paired with far
  std::vector<double> candidates_far;
  double split_delta = 0.0;               // two-regime split
  CvCriterion criterion = CvCriterion::cv2;
  int num_threads = 1;

  /// 20 log-spaced candidates on [delta0/50, delta0/2].
  static std::vector<double> default_candidates(double delta0);

  void validate(bool two_regime) const;
};

struct CvRow {
  double h_near = 0.0;     // == h_far for global search
  double h_far = 0.0;
  double score = 0.0;
  long terms = 0;          // ordered (pair, j, l) cells accumulated
  long skipped = 0;        // cells skipped for lack of kernel support
  bool usable = false;     // nonempty and skip fraction <= 20%

  bool is_global() const { return h_near == h_far; }
};

struct CvReport {
  std::vector<CvRow> rows;
  std::optional<std::size_t> best;  // index of argmin among usable rows
  CvCriterion criterion = CvCriterion::cv1;
  double delta0 = 0.0;

  const CvRow& best_row() const;
  std::string to_tsv() const;
};

/// Leave-one-subject-out CV scores (Eq. 11 / Eq. 12 style). The held-out
/// subject's raw cross-products are predicted by the estimator refit on the
/// remaining subjects with the same bandwidth.
double cv1_score(const Dataset& data, KernelFamily family, const BandwidthPolicy& bandwidth,
                 const CvConfig& config, long* terms = nullptr, long* skipped = nullptr);
double cv2_score(const Dataset& data, KernelFamily family, const BandwidthPolicy& bandwidth,
                 const CvConfig& config, long* terms = nullptr, long* skipped = nullptr);

/// Scores every candidate global bandwidth; ties break toward the smaller h.
CvReport select_bandwidth(const Dataset& data, KernelFamily family, const CvConfig& config);

/// Scores the Cartesian product of (h_near, h_far); ties break toward the
/// lexicographically smaller pair.
CvReport select_two_regime(const Dataset& data, KernelFamily family, const CvConfig& config);

}  // namespace spatcorr
