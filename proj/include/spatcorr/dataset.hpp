#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace spatcorr {

/// One independent replicate: unit locations on [0, L] and an N x m response
/// matrix over the shared subunit grid.
struct Subject {
  std::string id;
  std::vector<double> unit_locations;  // S_ri, finite, within [0, L], no duplicates
  Eigen::MatrixXd responses;           // Y_rij, N x m

  Eigen::Index num_units() const { return responses.rows(); }
};

struct Dataset {
  std::vector<Subject> subjects;
  std::vector<double> subunit_grid;  // x_j, strictly increasing, shared by all subjects
  double domain_length = 0.0;        // L, same unit as locations and lags

  Eigen::Index num_subunits() const { return static_cast<Eigen::Index>(subunit_grid.size()); }
  Eigen::Index num_subjects() const { return static_cast<Eigen::Index>(subjects.size()); }
  long total_units() const;

  /// Checks all structural invariants; throws Error(invalid_input) on violation.
  void validate() const;
};

/// Centered residuals e_rij = Y_rij - Ybar_r.j for one subject, with the
/// subject means kept alongside.
struct SubjectResiduals {
  std::string id;
  std::vector<double> unit_locations;
  Eigen::MatrixXd residuals;  // N x m
  Eigen::VectorXd means;      // Ybar_r.j, length m
};

struct ResidualSet {
  std::vector<SubjectResiduals> subjects;
  Eigen::Index num_subunits = 0;
};

/// Per-subject, per-subunit centering. Every subject must have at least one
/// unit; an empty subject is rejected with a diagnostic naming it.
ResidualSet center_residuals(const Dataset& data);

struct OrderedPair {
  Eigen::Index i;  // 0-based unit indices
  Eigen::Index k;
  double delta;    // S_ri - S_rk
};

/// All N(N-1) ordered pairs (i != k). Pairs with |delta| > abs_lag_cap are
/// pruned; the kernel sums never see them when the cap is at least
/// max queried |delta| + bandwidth.
std::vector<OrderedPair> enumerate_pairs(
    const Subject& subject,
    double abs_lag_cap = std::numeric_limits<double>::infinity());

/// Streaming variant used by the pair-indexing code.
void for_each_pair(const Subject& subject, double abs_lag_cap,
                   const std::function<void(const OrderedPair&)>& fn);

}  // namespace spatcorr
