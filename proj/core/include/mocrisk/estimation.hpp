#pragma once

// Maximum likelihood and minimum density power divergence estimation of the
// MOBE rates from interval-monitored counts, using cyclic coordinate descent.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mocrisk/model.hpp"

namespace mocrisk {

/// Observed counts in flattened cell order (N11, N12, N10, ..., NK1, NK2, NK0, Ns).
class CountData {
 public:
  explicit CountData(std::vector<std::int64_t> counts);

  static CountData zeros(const InspectionGrid& grid);

  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t operator[](std::size_t l) const { return counts_.at(l); }
  std::size_t size() const noexcept { return counts_.size(); }
  /// Total sample size n.
  std::int64_t n() const noexcept { return n_; }
  /// Number of inspection intervals this data was binned with.
  std::size_t intervals() const noexcept { return (counts_.size() - 1) / 3; }

  friend bool operator==(const CountData&, const CountData&) = default;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
};

/// Real-valued cell masses. Integer counts are the usual case; fractional
/// masses arise from contaminated model frequencies in influence studies.
struct CellWeights {
  std::vector<double> mass;
  double total = 0.0;

  static CellWeights from_counts(const CountData& data);
  /// n * probs, e.g. the expected counts of a model.
  static CellWeights from_probabilities(std::span<const double> probs, double n);

  std::size_t size() const noexcept { return mass.size(); }
};

/// DPD tuning parameter; zero selects the likelihood.
class TuningBeta {
 public:
  explicit TuningBeta(double beta);
  static TuningBeta mle() { return TuningBeta(0.0); }

  double value() const noexcept { return beta_; }
  bool is_mle() const noexcept { return beta_ == 0.0; }

 private:
  double beta_;
};

std::string to_string(const TuningBeta& beta);

/// When the descent stops. kAllCriteria requires both the parameter step and
/// the objective change to drop below the threshold; kAnyCriterion stops as
/// soon as either does.
enum class StopRule { kAllCriteria, kAnyCriterion };

struct FitConfig {
  double learning_rate = 0.01;
  double threshold = 1e-4;
  std::int64_t max_iterations = 1'000'000;
  Theta initial_theta{3.5, 1.5, 2.5};
  StopRule stop_rule = StopRule::kAllCriteria;
  /// Halve the learning rate whenever a sweep increases the objective and
  /// restore it after ten accepted sweeps. Off reproduces the plain
  /// fixed-step iteration.
  bool backtracking = false;

  void validate() const;
};

inline constexpr double kRateClamp = 1e-8;

enum class ObjectiveKind { kNegLogLikelihood, kDensityPowerDivergence };

struct FitResult {
  Theta theta_hat;
  double objective_value;
  std::int64_t iterations;
  bool converged;
  ObjectiveKind objective_kind;
  double beta;
  /// Learning rate in effect when the iteration stopped.
  double final_learning_rate;
};

/// -l(theta) = -sum_l N_l log p_l (multinomial coefficient dropped).
/// +inf when a cell with positive mass has probability exactly zero.
double neg_log_likelihood(const Theta& theta, const InspectionGrid& grid, const CellWeights& data);
double neg_log_likelihood(const Theta& theta, const InspectionGrid& grid, const CountData& data);

/// H_n(beta) = sum p^(1+beta) - (1+beta)/beta sum (N_l/n) p^beta. beta > 0.
double dpd_objective(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                     TuningBeta beta);
double dpd_objective(const Theta& theta, const InspectionGrid& grid, const CountData& data,
                     TuningBeta beta);

/// Full divergence d_beta between p(theta) and the empirical frequencies
/// (H_n plus the data-only term). beta > 0.
double dpd_divergence(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                      TuningBeta beta);

/// Gradient of H_n(beta) for beta > 0:
///   (1+beta) [ sum p^beta dp - sum (N_l/n) p^(beta-1) dp ].
/// For beta = 0 returns the score of the log-likelihood (the left side of the
/// likelihood estimating equations, zero at the MLE).
Eigen::Vector3d dpd_gradient(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                             TuningBeta beta);

/// Objective minimised by fit(): -l for beta = 0, H_n(beta) otherwise.
double fit_objective(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                     TuningBeta beta);
/// Gradient of fit_objective.
Eigen::Vector3d fit_objective_gradient(const Theta& theta, const InspectionGrid& grid,
                                       const CellWeights& data, TuningBeta beta);
/// Hessian of fit_objective from the analytic second derivatives of the cells.
Eigen::Matrix3d fit_objective_hessian(const Theta& theta, const InspectionGrid& grid,
                                      const CellWeights& data, TuningBeta beta);

/// Cyclic coordinate descent: lambda_0, lambda_1, lambda_2 updated in turn,
/// each partial evaluated at the freshest iterate. Coordinates are clamped at
/// kRateClamp from below.
FitResult fit(const InspectionGrid& grid, const CellWeights& data, TuningBeta beta,
              const FitConfig& config);
FitResult fit(const InspectionGrid& grid, const CountData& data, TuningBeta beta,
              const FitConfig& config);

struct SearchBounds {
  std::array<std::pair<double, double>, 3> range{{{0.5, 5.0}, {0.5, 5.0}, {0.5, 5.0}}};
};

/// Lattice minimiser of fit_objective over `resolution` evenly spaced points
/// per axis (end points included). Ties keep the first point in
/// lambda0-major order.
Theta grid_search_init(const InspectionGrid& grid, const CellWeights& data, TuningBeta beta,
                       const SearchBounds& bounds, int resolution);

}  // namespace mocrisk
