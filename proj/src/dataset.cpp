#include "spatcorr/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "spatcorr/errors.hpp"

namespace spatcorr {

long Dataset::total_units() const {
  long n = 0;
  for (const auto& s : subjects) n += static_cast<long>(s.num_units());
  return n;
}

void Dataset::validate() const {
  if (subunit_grid.empty()) raise(errc::invalid_input, "subunit grid is empty");
  for (std::size_t j = 0; j < subunit_grid.size(); ++j) {
    if (!std::isfinite(subunit_grid[j]))
      raise(errc::invalid_input, "subunit grid contains a non-finite value");
    if (j > 0 && !(subunit_grid[j] > subunit_grid[j - 1]))
      raise(errc::invalid_input, "subunit grid must be strictly increasing");
  }
  if (!(domain_length > 0.0)) raise(errc::invalid_input, "domain length must be positive");
  auto m = num_subunits();
  for (const auto& s : subjects) {
    if (s.responses.rows() != static_cast<Eigen::Index>(s.unit_locations.size()))
      raise(errc::invalid_input, "subject '" + s.id + "': responses rows != unit count");
    if (s.responses.cols() != m)
      raise(errc::invalid_input, "subject '" + s.id + "': responses cols != subunit grid size");
    for (double loc : s.unit_locations) {
      if (!std::isfinite(loc))
        raise(errc::invalid_input, "subject '" + s.id + "': non-finite unit location");
      if (loc < 0.0 || loc > domain_length)
        raise(errc::invalid_input, "subject '" + s.id + "': unit location outside [0, L]");
    }
    std::unordered_set<double> seen;
    for (double loc : s.unit_locations) {
      if (!seen.insert(loc).second)
        raise(errc::invalid_input, "subject '" + s.id + "': duplicate unit location");
    }
    if (!s.responses.allFinite())
      raise(errc::invalid_input, "subject '" + s.id + "': non-finite response");
  }
}

ResidualSet center_residuals(const Dataset& data) {
  ResidualSet out;
  out.num_subunits = data.num_subunits();
  out.subjects.reserve(data.subjects.size());
  for (const auto& s : data.subjects) {
    if (s.num_units() == 0)
      raise(errc::invalid_input, "subject '" + s.id + "' has no units; cannot center");
    SubjectResiduals r;
    r.id = s.id;
    r.unit_locations = s.unit_locations;
    r.means = s.responses.colwise().mean();
    r.residuals = s.responses.rowwise() - r.means.transpose();
    out.subjects.push_back(std::move(r));
  }
  return out;
}

void for_each_pair(const Subject& subject, double abs_lag_cap,
                   const std::function<void(const OrderedPair&)>& fn) {
  auto n = static_cast<Eigen::Index>(subject.unit_locations.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (i == k) continue;
      double delta = subject.unit_locations[i] - subject.unit_locations[k];
      if (std::abs(delta) > abs_lag_cap) continue;
      fn(OrderedPair{i, k, delta});
    }
  }
}

std::vector<OrderedPair> enumerate_pairs(const Subject& subject, double abs_lag_cap) {
  std::vector<OrderedPair> out;
  for_each_pair(subject, abs_lag_cap, [&](const OrderedPair& p) { out.push_back(p); });
  return out;
}

}  // namespace spatcorr
