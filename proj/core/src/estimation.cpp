#include "mocrisk/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mocrisk/errors.hpp"

namespace mocrisk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRestoreAfterSweeps = 10;

void check_sizes(const InspectionGrid& grid, const CellWeights& data) {
  if (data.size() != grid.cell_count()) {
    std::ostringstream msg;
    msg << "count vector has " << data.size() << " cells but the grid defines " << grid.cell_count();
    throw std::invalid_argument(msg.str());
  }
}

void require_dpd(TuningBeta beta) {
  if (beta.is_mle()) throw InvalidTuningError("beta = 0 is the likelihood; use neg_log_likelihood");
}

// Empirical frequency N_l / n, zero for an empty sample.
double frequency(const CellWeights& data, std::size_t l) {
  return data.total > 0.0 ? data.mass[l] / data.total : 0.0;
}

double nll_from_table(const CellTable& table, const CellWeights& data) {
  double value = 0.0;
  for (std::size_t l = 0; l < table.size(); ++l) {
    const double w = data.mass[l];
    if (w == 0.0) continue;
    if (table.probs[l] <= 0.0) return kInf;
    value -= w * std::log(table.floored(l));
  }
  return value;
}

double dpd_from_table(const CellTable& table, const CellWeights& data, double beta) {
  double model = 0.0;
  double cross = 0.0;
  for (std::size_t l = 0; l < table.size(); ++l) {
    const double p = table.floored(l);
    const double pb = std::pow(p, beta);
    model += pb * p;
    cross += frequency(data, l) * pb;
  }
  return model - (1.0 + beta) / beta * cross;
}

// Gradient of the minimised objective (-l or H_n).
Eigen::Vector3d objective_gradient_from_table(const CellTable& table, const CellWeights& data,
                                              double beta) {
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  if (beta == 0.0) {
    for (std::size_t l = 0; l < table.size(); ++l) {
      if (data.mass[l] == 0.0) continue;
      g -= data.mass[l] / table.floored(l) * table.grads[l];
    }
    return g;
  }
  for (std::size_t l = 0; l < table.size(); ++l) {
    const double p = table.floored(l);
    const double pb = std::pow(p, beta);
    g += (pb - frequency(data, l) * pb / p) * table.grads[l];
  }
  return (1.0 + beta) * g;
}

double objective_from_table(const CellTable& table, const CellWeights& data, double beta) {
  return beta == 0.0 ? nll_from_table(table, data) : dpd_from_table(table, data, beta);
}

bool stop_now(StopRule rule, double step, double change, double c) {
  const bool small_step = step < c;
  const bool small_change = change < c;
  return rule == StopRule::kAllCriteria ? (small_step && small_change) : (small_step || small_change);
}

}  // namespace

CountData::CountData(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 4 || (counts_.size() - 1) % 3 != 0) {
    throw std::invalid_argument("count vector length must be 3K + 1 with K >= 1");
  }
  for (std::int64_t c : counts_) {
    if (c < 0) throw std::invalid_argument("counts must be non-negative");
    n_ += c;
  }
}

CountData CountData::zeros(const InspectionGrid& grid) {
  return CountData(std::vector<std::int64_t>(grid.cell_count(), 0));
}

CellWeights CellWeights::from_counts(const CountData& data) {
  CellWeights w;
  w.mass.assign(data.counts().begin(), data.counts().end());
  w.total = static_cast<double>(data.n());
  return w;
}

CellWeights CellWeights::from_probabilities(std::span<const double> probs, double n) {
  CellWeights w;
  w.mass.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("cell masses must be non-negative");
    w.mass.push_back(n * p);
  }
  w.total = std::accumulate(w.mass.begin(), w.mass.end(), 0.0);
  return w;
}

TuningBeta::TuningBeta(double beta) : beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    std::ostringstream msg;
    msg << "beta must be a non-negative finite number, got " << beta;
    throw InvalidTuningError(msg.str());
  }
}

std::string to_string(const TuningBeta& beta) {
  if (beta.is_mle()) return "MLE";
  std::ostringstream out;
  out << "DPDE(" << beta.value() << ")";
  return out.str();
}

void FitConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("threshold must be positive");
  }
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

double neg_log_likelihood(const Theta& theta, const InspectionGrid& grid, const CellWeights& data) {
  check_sizes(grid, data);
  return nll_from_table(cell_table(theta, grid), data);
}

double neg_log_likelihood(const Theta& theta, const InspectionGrid& grid, const CountData& data) {
  return neg_log_likelihood(theta, grid, CellWeights::from_counts(data));
}

double dpd_objective(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                     TuningBeta beta) {
  require_dpd(beta);
  check_sizes(grid, data);
  return dpd_from_table(cell_table(theta, grid), data, beta.value());
}

double dpd_objective(const Theta& theta, const InspectionGrid& grid, const CountData& data,
                     TuningBeta beta) {
  return dpd_objective(theta, grid, CellWeights::from_counts(data), beta);
}

double dpd_divergence(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                      TuningBeta beta) {
  const double b = beta.value();
  double data_term = 0.0;
  for (std::size_t l = 0; l < data.size(); ++l) data_term += std::pow(frequency(data, l), 1.0 + b);
  return dpd_objective(theta, grid, data, beta) + data_term / b;
}

Eigen::Vector3d dpd_gradient(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                             TuningBeta beta) {
  check_sizes(grid, data);
  const Eigen::Vector3d g = objective_gradient_from_table(cell_table(theta, grid), data, beta.value());
  return beta.is_mle() ? Eigen::Vector3d(-g) : g;
}

double fit_objective(const Theta& theta, const InspectionGrid& grid, const CellWeights& data,
                     TuningBeta beta) {
  check_sizes(grid, data);
  return objective_from_table(cell_table(theta, grid), data, beta.value());
}

Eigen::Vector3d fit_objective_gradient(const Theta& theta, const InspectionGrid& grid,
                                       const CellWeights& data, TuningBeta beta) {
  check_sizes(grid, data);
  return objective_gradient_from_table(cell_table(theta, grid), data, beta.value());
}

Eigen::Matrix3d fit_objective_hessian(const Theta& theta, const InspectionGrid& grid,
                                      const CellWeights& data, TuningBeta beta) {
  check_sizes(grid, data);
  const CellTable table = cell_table(theta, grid);
  const auto hess = cell_hessians(theta, grid);
  const double b = beta.value();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t l = 0; l < table.size(); ++l) {
    const double p = table.floored(l);
    const Eigen::Matrix3d ggt = table.grads[l] * table.grads[l].transpose();
    if (b == 0.0) {
      const double w = data.mass[l];
      if (w == 0.0) continue;
      h -= w * (hess[l] / p - ggt / (p * p));
      continue;
    }
    // d^2 p^a = a p^(a-1) H + a (a-1) p^(a-2) g g^T
    const auto power_hessian = [&](double a) {
      return Eigen::Matrix3d(a * std::pow(p, a - 1.0) * hess[l] + a * (a - 1.0) * std::pow(p, a - 2.0) * ggt);
    };
    h += power_hessian(1.0 + b) - (1.0 + b) / b * frequency(data, l) * power_hessian(b);
  }
  return 0.5 * (h + h.transpose());
}

FitResult fit(const InspectionGrid& grid, const CellWeights& data, TuningBeta beta,
              const FitConfig& config) {
  config.validate();
  check_sizes(grid, data);
  const double b = beta.value();
  const double h0 = config.learning_rate;
  const double c = config.threshold;

  Eigen::Vector3d theta = config.initial_theta.vector();
  double h = h0;
  double objective = objective_from_table(cell_table(Theta::from_vector(theta), grid), data, b);
  int accepted_streak = 0;
  bool converged = false;
  std::int64_t sweep = 0;

  while (sweep < config.max_iterations && std::isfinite(objective)) {
    ++sweep;
    Eigen::Vector3d next = theta;
    for (std::size_t j = 0; j < 3; ++j) {
      const CellTable table = cell_table(Theta::from_vector(next), grid);
      const double partial = objective_gradient_from_table(table, data, b)[static_cast<Eigen::Index>(j)];
      const double stepped = next[static_cast<Eigen::Index>(j)] - h * partial;
      next[static_cast<Eigen::Index>(j)] = std::isnan(stepped) ? stepped : std::max(stepped, kRateClamp);
    }
    if (!next.allFinite()) {
      objective = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    const double next_objective = objective_from_table(cell_table(Theta::from_vector(next), grid), data, b);

    if (config.backtracking && !(next_objective <= objective)) {
      h *= 0.5;
      accepted_streak = 0;
      if (h < h0 * 1e-12) break;
      continue;
    }
    if (config.backtracking && ++accepted_streak >= kRestoreAfterSweeps) {
      h = h0;
      accepted_streak = 0;
    }

    const double step = (next - theta).cwiseAbs().maxCoeff();
    const double change = std::abs(next_objective - objective);
    theta = next;
    objective = next_objective;
    if (!std::isfinite(objective)) break;
    if (stop_now(config.stop_rule, step, change, c)) {
      converged = true;
      break;
    }
  }

  return FitResult{
      Theta::from_vector(theta),
      objective,
      sweep,
      converged,
      b == 0.0 ? ObjectiveKind::kNegLogLikelihood : ObjectiveKind::kDensityPowerDivergence,
      b,
      h,
  };
}

FitResult fit(const InspectionGrid& grid, const CountData& data, TuningBeta beta,
              const FitConfig& config) {
  return fit(grid, CellWeights::from_counts(data), beta, config);
}

Theta grid_search_init(const InspectionGrid& grid, const CellWeights& data, TuningBeta beta,
                       const SearchBounds& bounds, int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid search resolution must be at least 2");
  for (const auto& [lo, hi] : bounds.range) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
      throw std::invalid_argument("grid search bounds must be positive intervals");
    }
  }
  check_sizes(grid, data);
  const auto axis = [&](std::size_t j, int k) {
    const auto [lo, hi] = bounds.range[j];
    return lo + (hi - lo) * k / (resolution - 1);
  };

  double best = kInf;
  Theta best_theta(axis(0, 0), axis(1, 0), axis(2, 0));
  for (int a = 0; a < resolution; ++a) {
    for (int b = 0; b < resolution; ++b) {
      for (int d = 0; d < resolution; ++d) {
        const Theta candidate(axis(0, a), axis(1, b), axis(2, d));
        const double value = fit_objective(candidate, grid, data, beta);
        if (value < best) {
          best = value;
          best_theta = candidate;
        }
      }
    }
  }
  return best_theta;
}

}  // namespace mocrisk
