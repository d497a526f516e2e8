#pragma once

// Data generation from the MOBE model, the contamination protocol, and the
// Monte Carlo bias and power studies.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocrisk/estimation.hpp"
#include "mocrisk/model.hpp"
#include "mocrisk/rng.hpp"

namespace mocrisk {

/// n latent pairs (min(U0, U1), min(U0, U2)) from independent exponential shocks.
std::vector<BivariateObservation> sample_latent(const Theta& theta, std::int64_t n, Rng& rng);

/// Multinomial(n, probs) by sequential conditional binomials.
CountData sample_multinomial(std::span<const double> probs, std::int64_t n, Rng& rng);

enum class SamplingMode { kMultinomial, kLatent };

/// Counts drawn directly from the cell table or by classifying latent pairs.
CountData sample_counts(const Theta& theta, const InspectionGrid& grid, std::int64_t n, Rng& rng,
                        SamplingMode mode = SamplingMode::kMultinomial);

/// Bins latent observations into cells.
CountData tabulate(std::span<const BivariateObservation> sample, const InspectionGrid& grid);

struct ScenarioConfig {
  Theta theta_pure{4.5, 2.5, 3.5};
  Theta theta_contaminated{4.0, 1.9, 3.1};
  double contamination_fraction = 0.10;
  std::int64_t n = 20;
  InspectionGrid grid{{0.2, 0.3, 0.4}};
  std::int64_t replications = 1000;
  std::vector<double> betas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::uint64_t seed = 1;
  /// Descent settings; the initial value is overwritten with theta_pure.
  FitConfig fit;

  void validate() const;
};

/// The three pure / contaminated parameter pairs of the reference study.
std::vector<ScenarioConfig> reference_scenarios();

/// Each unit is drawn from MOBE(theta_contaminated) with probability epsilon,
/// otherwise from MOBE(theta_pure), then classified.
CountData sample_contaminated(const ScenarioConfig& config, Rng& rng);

struct BiasRow {
  std::string data;  // "pure" or "contaminated"
  double beta;
  std::array<double, 3> mean_bias;
  std::array<double, 3> std_error;
  std::int64_t used;
  std::int64_t failed;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  std::int64_t replications;

  const BiasRow& find(const std::string& data, double beta) const;
};

/// For each replication draws one pure and one contaminated table, fits every
/// beta from theta_pure and accumulates theta_hat - theta_pure over the fits
/// that converged.
BiasReport run_bias_study(const ScenarioConfig& config);

struct PowerRow {
  Theta theta_star;
  std::vector<double> power;  // one per beta
  std::vector<double> simulated_rejection;  // empty unless requested
};

struct PowerTable {
  std::vector<double> betas;
  std::vector<PowerRow> rows;
};

struct PowerStudyConfig {
  std::vector<Theta> thetas;
  InspectionGrid grid{{0.2, 0.3, 0.4}};
  std::int64_t n = 20;
  double alpha = 0.05;
  std::vector<double> betas{0.2, 0.4, 0.6, 0.8, 1.0};
  Eigen::Vector3d contrast{0.0, 1.0, -1.0};
  /// Monte Carlo replications of the Wald test per cell; 0 disables.
  std::int64_t simulation_replications = 0;
  std::uint64_t seed = 1;
  FitConfig fit;
};

struct BootstrapBias {
  /// Mean of theta_hat* - theta_hat over converged refits.
  std::array<double, 3> bias;
  std::int64_t used;
  std::int64_t dropped;
};

/// Parametric bootstrap estimate of the bias of a fit: B multinomial tables
/// from p(theta_hat), each refitted from theta_hat. Replicate r is seeded
/// from (seed, r).
BootstrapBias bootstrap_bias(const InspectionGrid& grid, std::int64_t n, const Theta& theta_hat,
                             TuningBeta beta, const FitConfig& config, std::int64_t replicates,
                             std::uint64_t seed);

/// The theta* rows of the reference power table.
std::vector<Theta> reference_power_thetas();

PowerTable run_power_study(const PowerStudyConfig& config);

}  // namespace mocrisk
