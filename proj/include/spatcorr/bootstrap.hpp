#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatcorr/dataset.hpp"
#include "spatcorr/kernel.hpp"
#include "spatcorr/rng.hpp"

namespace spatcorr {

struct BootstrapConfig {
  double block_length = 0.0;        // L*, 0 < L* <= L
  int replicates = 0;               // B >= 2
  std::uint64_t seed = 0;
  std::vector<double> delta_grid;   // evaluation lags
  int num_threads = 1;

  // Test hook: draw subjects 0..R-1 in order with block [0, L*] instead of
  // random draws. Exercises the A*_b == A identity when L* == L.
  bool force_identity_resample = false;

  void validate(const Dataset& data) const;
};

struct ResampleDraw {
  std::vector<int> subject_indices;  // with replacement
  std::vector<double> block_starts;  // one per drawn subject
};

struct ResampledDataset {
  Dataset data;        // locations preserved; domain_length unchanged
  ResampleDraw draw;   // records each block's effective domain [start, start+L*]
  double block_length = 0.0;
};

/// Steps 1-2 of the weighted block bootstrap: resample R subjects with
/// replacement, then keep only the units inside a uniformly placed block of
/// length L* within each resampled subject. Empty blocks are kept (N_r = 0).
ResampledDataset resample_once(const Dataset& data, const BootstrapConfig& config,
                               RngStream& stream);

struct BootstrapReplicate {
  ResampleDraw draw;
  std::vector<double> rho;       // rho*_b per grid point, NaN where undefined
  std::vector<double> weight;    // A*_b per grid point
};

struct BootstrapReport {
  std::vector<double> delta_grid;
  std::vector<double> sd;              // NaN where undefined
  std::vector<long> usable;            // replicates entering the sd at each point
  std::vector<long> skipped;           // replicates excluded at each point
  std::vector<double> full_weight;     // A(delta) from the full data
  std::vector<BootstrapReplicate> replicates;

  std::string to_tsv() const;
  std::string to_json() const;         // full diagnostics
};

/// Steps 3-5: per-replicate rho*_b and A*_b with the same bandwidth as the
/// point estimate, then the intensity-weighted sd. Replicates where rho*_b is
/// undefined at a grid point are excluded there and counted.
BootstrapReport bootstrap_sd(const Dataset& data, const KernelSpec& kernel,
                             const BootstrapConfig& config);

}  // namespace spatcorr
