#pragma once

// Marshall-Olkin bivariate exponential (MOBE) lifetimes observed through
// periodic inspections: the joint law, the multinomial cell probabilities of
// interval-monitored competing-risk counts, and their analytic derivatives.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mocrisk {

/// Probabilities are floored here before logarithms or negative powers.
inline constexpr double kProbabilityFloor = 1e-300;

/// Rate triple (lambda0, lambda1, lambda2). lambda0 drives simultaneous
/// failure of both components, lambda1/lambda2 the individual causes.
class Theta {
 public:
  Theta(double lambda0, double lambda1, double lambda2);

  static Theta from_vector(const Eigen::Vector3d& v);

  double lambda0() const noexcept { return rates_[0]; }
  double lambda1() const noexcept { return rates_[1]; }
  double lambda2() const noexcept { return rates_[2]; }
  double operator[](std::size_t j) const { return rates_.at(j); }

  /// lambda = lambda0 + lambda1 + lambda2.
  double total() const noexcept { return rates_[0] + rates_[1] + rates_[2]; }

  Eigen::Vector3d vector() const { return {rates_[0], rates_[1], rates_[2]}; }

  /// Copy with coordinate j replaced.
  Theta with(std::size_t j, double value) const;

  /// Every rate multiplied by factor (> 0).
  Theta scaled(double factor) const;

  friend bool operator==(const Theta&, const Theta&) = default;

 private:
  std::array<double, 3> rates_;
};

std::string to_string(const Theta& theta);

/// Inspection times tau_1 < ... < tau_K with implicit tau_0 = 0.
class InspectionGrid {
 public:
  /// Strict grid: K >= 1 and 0 < tau_1 < ... < tau_K.
  explicit InspectionGrid(std::vector<double> times);

  /// Candidate grids produced during design search may repeat a time or start
  /// at zero. Requires 0 <= tau_1 <= ... <= tau_K; empty intervals get zero
  /// probability.
  static InspectionGrid non_strict(std::vector<double> times);

  std::size_t size() const noexcept { return times_.size(); }
  /// tau_i for i in 0..K (tau_0 = 0).
  double tau(std::size_t i) const { return i == 0 ? 0.0 : times_.at(i - 1); }
  double horizon() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }

  /// Number of multinomial cells M = 3K + 1.
  std::size_t cell_count() const noexcept { return 3 * times_.size() + 1; }

  InspectionGrid scaled(double factor) const;

  friend bool operator==(const InspectionGrid&, const InspectionGrid&) = default;

 private:
  struct NoCheck {};
  InspectionGrid(std::vector<double> times, NoCheck) : times_(std::move(times)) {}

  std::vector<double> times_;
};

/// Failure mode recorded for a unit: cause 1 alone, cause 2 alone, or both
/// at once. Within an interval cells are laid out in this order.
enum class Cause { kOne = 0, kTwo = 1, kBoth = 2 };

/// Flattened cell index (0-based): interval i in 1..K and cause map to
/// 3(i-1) + offset(cause); the survivor cell is M - 1.
std::size_t cell_index(std::size_t interval, Cause cause);
inline std::size_t survivor_index(const InspectionGrid& grid) { return grid.cell_count() - 1; }

/// Human-readable cell label such as "N21" or "Ns".
std::string cell_label(const InspectionGrid& grid, std::size_t cell);

/// Cell probabilities in flattened order (p11, p12, p10, ..., pK1, pK2, pK0, ps)
/// together with d p_l / d theta.
struct CellTable {
  std::vector<double> probs;
  std::vector<Eigen::Vector3d> grads;

  std::size_t size() const noexcept { return probs.size(); }

  /// p_l floored at kProbabilityFloor.
  double floored(std::size_t l) const;

  /// d log p_l / d theta.
  Eigen::Vector3d log_gradient(std::size_t l) const;
};

/// Joint density of (X1, X2); on the diagonal x1 == x2 the returned value is
/// the density of the singular component, lambda0 exp(-lambda x).
double mobe_joint_density(const Theta& theta, double x1, double x2);

/// P(X1 > x1, X2 > x2).
double mobe_joint_survival(const Theta& theta, double x1, double x2);

/// Probabilities and exact first derivatives of every monitoring cell.
CellTable cell_table(const Theta& theta, const InspectionGrid& grid);

/// Exact first derivatives d p_l / d lambda_j.
std::vector<Eigen::Vector3d> cell_gradients(const Theta& theta, const InspectionGrid& grid);

/// Exact second derivatives d^2 p_l / d lambda_j d lambda_k.
std::vector<Eigen::Matrix3d> cell_hessians(const Theta& theta, const InspectionGrid& grid);

/// A realised pair of latent failure times.
struct BivariateObservation {
  BivariateObservation(double first, double second);

  double x1;
  double x2;
};

/// Index of the monitoring cell containing the observation. Ties x1 == x2
/// are detected by exact equality.
std::size_t classify_cell(const BivariateObservation& x, const InspectionGrid& grid);

}  // namespace mocrisk
