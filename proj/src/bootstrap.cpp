#include "spatcorr/bootstrap.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "spatcorr/errors.hpp"
#include "spatcorr/estimator.hpp"
#include "spatcorr/io.hpp"
#include "spatcorr/numeric.hpp"
#include "spatcorr/parallel.hpp"

namespace spatcorr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace

void BootstrapConfig::validate(const Dataset& data) const {
  if (!(block_length > 0.0) || block_length > data.domain_length)
    raise(errc::invalid_input, "block length must satisfy 0 < L* <= L");
  if (replicates < 2) raise(errc::invalid_input, "at least 2 bootstrap replicates required");
  if (delta_grid.empty()) raise(errc::invalid_input, "delta grid is empty");
}

ResampledDataset resample_once(const Dataset& data, const BootstrapConfig& config,
                               RngStream& stream) {
  const auto R = data.num_subjects();
  if (R == 0) raise(errc::invalid_input, "dataset has no subjects");
  const double L = data.domain_length;
  const double Ls = config.block_length;

  ResampledDataset out;
  out.block_length = Ls;
  out.data.subunit_grid = data.subunit_grid;
  out.data.domain_length = L;
  out.data.subjects.reserve(R);
  for (Eigen::Index r = 0; r < R; ++r) {
    int pick;
    double start;
    if (config.force_identity_resample) {
      pick = static_cast<int>(r);
      start = 0.0;
    } else {
      pick = static_cast<int>(stream.uniform_index(static_cast<std::uint64_t>(R)));
      start = Ls < L ? stream.uniform(0.0, L - Ls) : 0.0;
    }
    out.draw.subject_indices.push_back(pick);
    out.draw.block_starts.push_back(start);

    const Subject& src = data.subjects[static_cast<std::size_t>(pick)];
    Subject blk;
    blk.id = src.id;
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < src.unit_locations.size(); ++i) {
      double loc = src.unit_locations[i];
      if (loc >= start && loc <= start + Ls) {
        keep.push_back(static_cast<Eigen::Index>(i));
        blk.unit_locations.push_back(loc);  // locations preserved, not recentered
      }
    }
    blk.responses.resize(static_cast<Eigen::Index>(keep.size()), data.num_subunits());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      blk.responses.row(static_cast<Eigen::Index>(i)) = src.responses.row(keep[i]);
    }
    out.data.subjects.push_back(std::move(blk));
  }
  return out;
}

BootstrapReport bootstrap_sd(const Dataset& data, const KernelSpec& kernel,
                             const BootstrapConfig& config) {
  data.validate();
  kernel.validate();
  config.validate(data);

  const double cap = max_abs(config.delta_grid) + kernel.bandwidth.max_bandwidth();
  auto full = make_estimate(data, kernel, cap);

  BootstrapReport report;
  report.delta_grid = config.delta_grid;
  const std::size_t Q = config.delta_grid.size();
  report.full_weight.resize(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    // The point estimate must be defined wherever an sd is requested.
    full.rho_hat(config.delta_grid[q]);
    report.full_weight[q] = full.pair_weight(config.delta_grid[q]);
  }

  const int B = config.replicates;
  report.replicates.resize(static_cast<std::size_t>(B));
  RngKey key(config.seed);
  parallel_for(B, config.num_threads, [&](long b) {
    RngStream stream(key.fold(static_cast<std::uint64_t>(b)));
    auto res = resample_once(data, config, stream);
    BootstrapReplicate rep;
    rep.draw = std::move(res.draw);
    rep.rho.assign(Q, kNaN);
    rep.weight.assign(Q, 0.0);

    Dataset usable;
    usable.subunit_grid = res.data.subunit_grid;
    usable.domain_length = res.data.domain_length;
    for (auto& s : res.data.subjects) {
      if (s.num_units() >= 1) usable.subjects.push_back(std::move(s));
    }
    if (!usable.subjects.empty()) {
      CovarianceEstimate est(center_residuals(usable), kernel, cap);
      for (std::size_t q = 0; q < Q; ++q) {
        rep.weight[q] = est.pair_weight(config.delta_grid[q]);
        try {
          auto v = est.rho_hat_opt(config.delta_grid[q]);
          if (v) rep.rho[q] = *v;
        } catch (const Error& e) {
          if (e.code() != errc::degenerate_g) throw;
          // degenerate block replicate: rho undefined everywhere
          break;
        }
      }
    }
    report.replicates[static_cast<std::size_t>(b)] = std::move(rep);
  });

  report.sd.assign(Q, kNaN);
  report.usable.assign(Q, 0);
  report.skipped.assign(Q, 0);
  for (std::size_t q = 0; q < Q; ++q) {
    KahanSum mean_sum;
    long n = 0;
    for (const auto& rep : report.replicates) {
      if (std::isfinite(rep.rho[q])) {
        mean_sum.add(rep.rho[q]);
        ++n;
      }
    }
    report.usable[q] = n;
    report.skipped[q] = B - n;
    if (n < 2) continue;
    double mean = mean_sum.value() / static_cast<double>(n);
    KahanSum wsq;
    for (const auto& rep : report.replicates) {
      if (std::isfinite(rep.rho[q])) {
        double d = rep.rho[q] - mean;
        wsq.add(rep.weight[q] * d * d);
      }
    }
    report.sd[q] =
        std::sqrt(wsq.value() / (report.full_weight[q] * static_cast<double>(n)));
  }
  return report;
}

std::string BootstrapReport::to_tsv() const {
  std::ostringstream os;
  os << "delta\tsd\tusable\n";
  for (std::size_t q = 0; q < delta_grid.size(); ++q) {
    os << format_double(delta_grid[q]) << '\t' << format_double(sd[q]) << '\t' << usable[q]
       << '\n';
  }
  return os.str();
}

std::string BootstrapReport::to_json() const {
  nlohmann::json j;
  j["delta_grid"] = delta_grid;
  j["sd"] = sd;
  j["usable"] = usable;
  j["skipped"] = skipped;
  j["full_weight"] = full_weight;
  auto& reps = j["replicates"] = nlohmann::json::array();
  for (const auto& rep : replicates) {
    nlohmann::json r;
    r["subjects"] = rep.draw.subject_indices;
    r["block_starts"] = rep.draw.block_starts;
    r["rho"] = rep.rho;
    r["weight"] = rep.weight;
    reps.push_back(std::move(r));
  }
  return j.dump(2);
}

}  // namespace spatcorr
