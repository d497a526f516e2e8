#pragma once

// Wald-type test of a single linear contrast of the rates, its normal power
// approximation, and the parametric bootstrap goodness-of-fit test.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocrisk/estimation.hpp"
#include "mocrisk/model.hpp"

namespace mocrisk {

/// Upper-alpha quantile of the chi-square law with `df` degrees of freedom.
double chi_square_upper_quantile(double alpha, double df = 1.0);

struct WaldReport {
  double statistic;
  double critical_value;
  double alpha;
  bool reject;
  Eigen::Vector3d contrast;
  /// P(chi2_1 >= statistic).
  double p_value;
};

/// M_n = n (a'theta)^2 / (a' Sigma(theta) a), rejected when M_n >= chi2_{1,alpha}.
WaldReport wald_test(const Theta& theta_hat, const InspectionGrid& grid, TuningBeta beta,
                     std::int64_t n, double alpha, const Eigen::Vector3d& a0);

struct PowerReport {
  double power;
  /// m(theta*, theta*) = (a'theta*)^2 / (a' Sigma a).
  double m;
  /// sigma^2 from the gradient of m, and the closed form 4 m it must equal.
  double sigma2;
  double sigma2_closed_form;
};

/// Normal approximation 1 - Phi((chi2_{1,alpha}/sqrt(n) - sqrt(n) m) / sigma).
/// Throws NullPointError when a'theta* = 0, and std::logic_error if the
/// gradient form of sigma^2 drifts from 4 m by more than 1e-10 (relative).
PowerReport wald_power_report(const Theta& theta_star, const InspectionGrid& grid, TuningBeta beta,
                              std::int64_t n, double alpha, const Eigen::Vector3d& a0);

double wald_power(const Theta& theta_star, const InspectionGrid& grid, TuningBeta beta,
                  std::int64_t n, double alpha, const Eigen::Vector3d& a0);

/// E_l = n p_l(theta).
std::vector<double> expected_counts(const CountData& data, const Theta& theta, const InspectionGrid& grid);

/// S = sum_l |N_l - E_l|.
double gof_statistic(const CountData& data, const Theta& theta_hat, const InspectionGrid& grid);

struct GofReport {
  double statistic;
  double p_value;
  /// Replicates requested.
  std::int64_t bootstrap_count;
  /// Replicates whose refit converged; the p-value denominator.
  std::int64_t used;
  std::int64_t dropped;
  std::vector<double> expected_counts;
  Theta theta_hat;
  bool fit_converged;
  std::optional<std::string> warning;
};

/// Fits data with `fit_config`, draws B multinomial(n, p(theta_hat)) tables,
/// refits each starting from theta_hat and returns #{S* > S} / (used
/// replicates). Replicate r is seeded from (seed, r) so the result does not
/// depend on threading.
GofReport gof_bootstrap_pvalue(const CountData& data, const InspectionGrid& grid, TuningBeta beta,
                               std::int64_t bootstrap_count, std::uint64_t seed,
                               const FitConfig& fit_config = {});

}  // namespace mocrisk
