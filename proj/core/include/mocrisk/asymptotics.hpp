#pragma once

// Sandwich covariance of the minimum DPD estimator and its influence
// functions, including the second-order influence of the Wald statistic.

#include <vector>

#include <Eigen/Core>

#include "mocrisk/estimation.hpp"
#include "mocrisk/model.hpp"

namespace mocrisk {

/// Condition number above which a 3x3 matrix is treated as singular.
inline constexpr double kConditionLimit = 1e12;

/// Var(theta_hat) ~ sigma / n.
struct SandwichCovariance {
  Eigen::Matrix3d j;
  Eigen::Matrix3d k;
  Eigen::Matrix3d sigma;
};

/// First-order influence of the estimator and the second-order influence of
/// the Wald statistic at one observation.
struct InfluenceVector {
  Eigen::Vector3d value;
  double wald_second_order = 0.0;
};

/// J = sum_l p_l^(beta-1) g_l g_l^T.
Eigen::Matrix3d j_matrix(const Theta& theta, const InspectionGrid& grid, TuningBeta beta);

/// K = sum_l p_l^(2 beta - 1) g_l g_l^T - xi xi^T with xi = sum_l p_l^beta g_l.
Eigen::Matrix3d k_matrix(const Theta& theta, const InspectionGrid& grid, TuningBeta beta);

/// Inverse of a symmetric positive definite 3x3 matrix through its
/// eigendecomposition. Throws SingularMatrixError past kConditionLimit.
Eigen::Matrix3d guarded_inverse(const Eigen::Matrix3d& m, const char* what);

SandwichCovariance sandwich(const Theta& theta, const InspectionGrid& grid, TuningBeta beta);

/// IF of the estimator for a unit in cell `cell`: J^-1 (p_c^(beta-1) g_c - xi).
Eigen::Vector3d influence_cell(std::size_t cell, const Theta& theta, const InspectionGrid& grid,
                               TuningBeta beta);

/// IF for every cell in flattened order.
std::vector<Eigen::Vector3d> influence_table(const Theta& theta, const InspectionGrid& grid,
                                             TuningBeta beta);

/// IF at x; the second-order Wald term is computed against the default
/// contrast (0, 1, -1).
InfluenceVector influence_point(const BivariateObservation& x, const Theta& theta,
                                const InspectionGrid& grid, TuningBeta beta);

/// IF2 = 2 IF^T a (a^T Sigma a)^-1 a^T IF at x.
double wald_influence2(const BivariateObservation& x, const Theta& theta0, const InspectionGrid& grid,
                       TuningBeta beta, const Eigen::Vector3d& a0);

/// Same quantity for a unit in a given cell.
double wald_influence2_cell(std::size_t cell, const Theta& theta0, const InspectionGrid& grid,
                            TuningBeta beta, const Eigen::Vector3d& a0);

/// Contrast of the equal-cause-rates hypothesis.
inline Eigen::Vector3d default_contrast() { return {0.0, 1.0, -1.0}; }

}  // namespace mocrisk
