#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spatcorr/psd.hpp"
#include "spatcorr/simulate.hpp"

namespace spatcorr {

struct BootstrapPlan {
  int replicates = 0;
  double block_length = 0.0;
};

struct AdjustPlan {
  TaperWeight taper;
  // Transform grid; zeros mean "derive defaults from the delta grid".
  double theta_step = 0.0;
  double theta_max = 0.0;
};

/// Full specification of one simulation experiment (sample -> estimate ->
/// bootstrap -> adjust, replicated).
struct Scenario {
  int replications = 0;
  std::uint64_t seed = 0;
  int num_subjects = 1;
  RandomFieldModel model;
  KernelFamily kernel_family = KernelFamily::epanechnikov;
  BandwidthPolicy bandwidth = BandwidthPolicy::global(1.0);
  std::vector<double> delta_grid;  // uniform, starting at 0
  std::optional<BootstrapPlan> bootstrap;
  std::optional<AdjustPlan> adjust;
  double imse_delta_max = 0.0;     // 0 disables the IMSE pair
  int num_threads = 1;

  void validate() const;
};

struct ExperimentReport {
  std::vector<double> delta_grid;
  std::vector<double> truth;          // rho(delta) under the scenario model
  std::vector<double> mean_rho;
  std::vector<double> p5;
  std::vector<double> p95;
  std::vector<double> emp_sd;         // across replicates
  std::vector<double> mean_boot_sd;   // empty when bootstrap disabled
  std::vector<double> mean_adjusted;  // empty when adjustment disabled
  std::vector<long> defined_count;    // replicates with rho defined per grid point

  // Per-replicate diagnostics.
  std::vector<std::vector<double>> rho_curves;
  std::vector<std::vector<double>> adjusted_curves;
  std::vector<double> imse_raw;       // per replicate, when enabled
  std::vector<double> imse_adjusted;
  double mean_imse_raw = 0.0;
  double mean_imse_adjusted = 0.0;
  int replications = 0;

  std::string curves_tsv() const;
  std::string summary_json() const;
};

/// Runs the scenario. Replicate b's randomness depends only on (seed, b), and
/// aggregation is order-fixed, so serial and parallel runs agree bitwise.
ExperimentReport run_experiment(const Scenario& scenario);

/// JSON round-trip for scenario configs (schema_version 1).
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace spatcorr
