#include "mocrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "mocrisk/errors.hpp"

namespace mocrisk {
namespace {

void require_positive_time(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << name << " must be a positive finite time, got " << x;
    throw std::domain_error(msg.str());
  }
}

// Per-interval pieces shared by every cause: the mass
// D = exp(-lambda a) - exp(-lambda b) on (a, b] and its first two
// derivatives with respect to lambda.
struct IntervalMass {
  double value;
  double d1;
  double d2;
};

IntervalMass interval_mass(double lambda, double a, double b) {
  const double ea = std::exp(-lambda * a);
  const double eb = std::exp(-lambda * b);
  return {
      -ea * std::expm1(-lambda * (b - a)),
      -a * ea + b * eb,
      a * a * ea - b * b * eb,
  };
}

constexpr std::array<std::size_t, 3> kRateOfCause = {1, 2, 0};

}  // namespace

Theta::Theta(double lambda0, double lambda1, double lambda2) : rates_{lambda0, lambda1, lambda2} {
  for (std::size_t j = 0; j < 3; ++j) {
    if (!(rates_[j] > 0.0) || !std::isfinite(rates_[j])) {
      std::ostringstream msg;
      msg << "lambda" << j << " must be positive and finite, got " << rates_[j];
      throw std::domain_error(msg.str());
    }
  }
}

Theta Theta::from_vector(const Eigen::Vector3d& v) { return Theta(v[0], v[1], v[2]); }

Theta Theta::with(std::size_t j, double value) const {
  auto r = rates_;
  r.at(j) = value;
  return Theta(r[0], r[1], r[2]);
}

Theta Theta::scaled(double factor) const {
  return Theta(rates_[0] * factor, rates_[1] * factor, rates_[2] * factor);
}

std::string to_string(const Theta& theta) {
  std::ostringstream out;
  out.precision(10);
  out << "(" << theta.lambda0() << ", " << theta.lambda1() << ", " << theta.lambda2() << ")";
  return out.str();
}

InspectionGrid::InspectionGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw std::invalid_argument("inspection grid needs at least one time");
  double prev = 0.0;
  for (double t : times_) {
    if (!std::isfinite(t) || !(t > prev)) {
      throw std::invalid_argument("inspection times must satisfy 0 < tau_1 < ... < tau_K");
    }
    prev = t;
  }
}

InspectionGrid InspectionGrid::non_strict(std::vector<double> times) {
  if (times.empty()) throw std::invalid_argument("inspection grid needs at least one time");
  double prev = 0.0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) {
      throw std::invalid_argument("inspection times must satisfy 0 <= tau_1 <= ... <= tau_K");
    }
    prev = t;
  }
  return InspectionGrid(std::move(times), NoCheck{});
}

InspectionGrid InspectionGrid::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("grid scale factor must be positive");
  std::vector<double> t = times_;
  for (double& x : t) x *= factor;
  return InspectionGrid(std::move(t), NoCheck{});
}

std::size_t cell_index(std::size_t interval, Cause cause) {
  if (interval == 0) throw std::out_of_range("intervals are numbered from 1");
  return 3 * (interval - 1) + static_cast<std::size_t>(cause);
}

std::string cell_label(const InspectionGrid& grid, std::size_t cell) {
  if (cell == survivor_index(grid)) return "Ns";
  if (cell > survivor_index(grid)) throw std::out_of_range("cell index out of range");
  static constexpr std::array<char, 3> kCauseDigit = {'1', '2', '0'};
  return "N" + std::to_string(cell / 3 + 1) + kCauseDigit[cell % 3];
}

double CellTable::floored(std::size_t l) const { return std::max(probs.at(l), kProbabilityFloor); }

Eigen::Vector3d CellTable::log_gradient(std::size_t l) const { return grads.at(l) / floored(l); }

double mobe_joint_density(const Theta& theta, double x1, double x2) {
  require_positive_time(x1, "x1");
  require_positive_time(x2, "x2");
  const double l0 = theta.lambda0();
  const double l1 = theta.lambda1();
  const double l2 = theta.lambda2();
  if (x1 < x2) return l1 * (l0 + l2) * std::exp(-l1 * x1 - (l0 + l2) * x2);
  if (x2 < x1) return l2 * (l0 + l1) * std::exp(-(l0 + l1) * x1 - l2 * x2);
  return l0 * std::exp(-theta.total() * x1);
}

double mobe_joint_survival(const Theta& theta, double x1, double x2) {
  require_positive_time(x1, "x1");
  require_positive_time(x2, "x2");
  const double z = std::max(x1, x2);
  return std::exp(-(theta.lambda0() * z + theta.lambda1() * x1 + theta.lambda2() * x2));
}

CellTable cell_table(const Theta& theta, const InspectionGrid& grid) {
  const double lambda = theta.total();
  const std::size_t k = grid.size();
  CellTable table;
  table.probs.resize(grid.cell_count());
  table.grads.resize(grid.cell_count());

  for (std::size_t i = 1; i <= k; ++i) {
    const IntervalMass mass = interval_mass(lambda, grid.tau(i - 1), grid.tau(i));
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t j = kRateOfCause[c];
      const double share = theta[j] / lambda;
      const std::size_t l = 3 * (i - 1) + c;
      table.probs[l] = share * mass.value;
      // d(lambda_j / lambda)/d lambda_m = [m == j] / lambda - lambda_j / lambda^2
      Eigen::Vector3d g = Eigen::Vector3d::Constant(-share / lambda * mass.value + share * mass.d1);
      g[j] += mass.value / lambda;
      table.grads[l] = g;
    }
  }
  const double ps = std::exp(-lambda * grid.horizon());
  table.probs.back() = ps;
  table.grads.back() = Eigen::Vector3d::Constant(-grid.horizon() * ps);
  return table;
}

std::vector<Eigen::Vector3d> cell_gradients(const Theta& theta, const InspectionGrid& grid) {
  return cell_table(theta, grid).grads;
}

std::vector<Eigen::Matrix3d> cell_hessians(const Theta& theta, const InspectionGrid& grid) {
  const double lambda = theta.total();
  const std::size_t k = grid.size();
  std::vector<Eigen::Matrix3d> out(grid.cell_count());

  for (std::size_t i = 1; i <= k; ++i) {
    const IntervalMass mass = interval_mass(lambda, grid.tau(i - 1), grid.tau(i));
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t j = kRateOfCause[c];
      const double share = theta[j] / lambda;
      // share = lambda_j / lambda; first and second partials.
      Eigen::Vector3d ds = Eigen::Vector3d::Constant(-share / lambda);
      ds[j] += 1.0 / lambda;
      Eigen::Matrix3d dds = Eigen::Matrix3d::Constant(2.0 * share / (lambda * lambda));
      for (std::size_t m = 0; m < 3; ++m) {
        dds(j, m) -= 1.0 / (lambda * lambda);
        dds(m, j) -= 1.0 / (lambda * lambda);
      }
      const Eigen::Vector3d ones = Eigen::Vector3d::Ones();
      out[3 * (i - 1) + c] = dds * mass.value + (ds * ones.transpose() + ones * ds.transpose()) * mass.d1 +
                             Eigen::Matrix3d::Constant(share * mass.d2);
    }
  }
  const double tk = grid.horizon();
  out.back() = Eigen::Matrix3d::Constant(tk * tk * std::exp(-lambda * tk));
  return out;
}

BivariateObservation::BivariateObservation(double first, double second) : x1(first), x2(second) {
  if (!(x1 > 0.0) || !(x2 > 0.0) || std::isnan(x1) || std::isnan(x2)) {
    throw ClassificationError("bivariate observation needs two positive failure times");
  }
}

std::size_t classify_cell(const BivariateObservation& x, const InspectionGrid& grid) {
  if (!(x.x1 > 0.0) || !(x.x2 > 0.0)) {
    throw ClassificationError("observation outside the positive quadrant");
  }
  const double t = std::min(x.x1, x.x2);
  if (t > grid.horizon()) return survivor_index(grid);
  const Cause cause = x.x1 < x.x2 ? Cause::kOne : (x.x2 < x.x1 ? Cause::kTwo : Cause::kBoth);
  const auto& times = grid.times();
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end()) throw ClassificationError("observation falls in no monitoring cell");
  const auto interval = static_cast<std::size_t>(it - times.begin()) + 1;
  return cell_index(interval, cause);
}

}  // namespace mocrisk
