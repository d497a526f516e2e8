#include "mocrisk/hypothesis.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/errors.hpp"
#include "mocrisk/rng.hpp"
#include "mocrisk/simulation.hpp"
#include "parallel.hpp"

namespace mocrisk {
namespace {

void require_level(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

double contrast_variance(const Theta& theta, const InspectionGrid& grid, TuningBeta beta,
                         const Eigen::Vector3d& a0) {
  const double v = a0.dot(sandwich(theta, grid, beta).sigma * a0);
  if (!(v > 0.0) || !std::isfinite(v)) throw SingularMatrixError("a0' Sigma a0 is not positive");
  return v;
}

}  // namespace

double chi_square_upper_quantile(double alpha, double df) {
  require_level(alpha);
  const boost::math::chi_squared dist(df);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

WaldReport wald_test(const Theta& theta_hat, const InspectionGrid& grid, TuningBeta beta,
                     std::int64_t n, double alpha, const Eigen::Vector3d& a0) {
  if (n < 1) throw std::invalid_argument("Wald test needs n >= 1");
  require_level(alpha);
  const double var = contrast_variance(theta_hat, grid, beta, a0);
  const double c = a0.dot(theta_hat.vector());
  const double stat = static_cast<double>(n) * c * c / var;
  const double critical = chi_square_upper_quantile(alpha);
  const boost::math::chi_squared chi1(1.0);
  return WaldReport{stat, critical, alpha, stat >= critical, a0,
                    boost::math::cdf(boost::math::complement(chi1, stat))};
}

PowerReport wald_power_report(const Theta& theta_star, const InspectionGrid& grid, TuningBeta beta,
                              std::int64_t n, double alpha, const Eigen::Vector3d& a0) {
  if (n < 1) throw std::invalid_argument("power needs n >= 1");
  require_level(alpha);
  const double c = a0.dot(theta_star.vector());
  if (c == 0.0) throw NullPointError("theta* satisfies the null hypothesis; sigma(theta*) = 0");
  const Eigen::Matrix3d sigma = sandwich(theta_star, grid, beta).sigma;
  const double var = a0.dot(sigma * a0);
  if (!(var > 0.0)) throw SingularMatrixError("a0' Sigma a0 is not positive");

  const double m = c * c / var;
  // d m(theta, theta*) / d theta at theta = theta*.
  const Eigen::Vector3d grad = 2.0 * c / var * a0;
  const double sigma2 = grad.dot(sigma * grad);
  const double closed = 4.0 * m;
  if (std::abs(sigma2 - closed) > 1e-10 * std::max(1.0, closed)) {
    std::ostringstream msg;
    msg << "sigma^2 = " << sigma2 << " differs from 4m = " << closed;
    throw std::logic_error(msg.str());
  }
  const double rn = std::sqrt(static_cast<double>(n));
  const double z = (chi_square_upper_quantile(alpha) / rn - rn * m) / std::sqrt(sigma2);
  // 1 - Phi(z) without cancellation in the upper tail.
  const double power = 0.5 * std::erfc(z / std::sqrt(2.0));
  return PowerReport{power, m, sigma2, closed};
}

double wald_power(const Theta& theta_star, const InspectionGrid& grid, TuningBeta beta,
                  std::int64_t n, double alpha, const Eigen::Vector3d& a0) {
  return wald_power_report(theta_star, grid, beta, n, alpha, a0).power;
}

std::vector<double> expected_counts(const CountData& data, const Theta& theta, const InspectionGrid& grid) {
  if (data.size() != grid.cell_count()) throw std::invalid_argument("count vector does not match the grid");
  const CellTable table = cell_table(theta, grid);
  std::vector<double> e(table.size());
  for (std::size_t l = 0; l < e.size(); ++l) e[l] = static_cast<double>(data.n()) * table.probs[l];
  return e;
}

double gof_statistic(const CountData& data, const Theta& theta_hat, const InspectionGrid& grid) {
  const auto e = expected_counts(data, theta_hat, grid);
  double s = 0.0;
  for (std::size_t l = 0; l < e.size(); ++l) s += std::abs(static_cast<double>(data[l]) - e[l]);
  return s;
}

GofReport gof_bootstrap_pvalue(const CountData& data, const InspectionGrid& grid, TuningBeta beta,
                               std::int64_t bootstrap_count, std::uint64_t seed,
                               const FitConfig& fit_config) {
  if (bootstrap_count < 1) throw std::invalid_argument("bootstrap count must be at least 1");
  const FitResult base = fit(grid, data, beta, fit_config);
  const Theta theta_hat = base.theta_hat;
  const double s = gof_statistic(data, theta_hat, grid);
  const CellTable table = cell_table(theta_hat, grid);

  FitConfig refit = fit_config;
  refit.initial_theta = theta_hat;

  // 1 = exceeds, 0 = does not, -1 = dropped.
  std::vector<int> outcome(static_cast<std::size_t>(bootstrap_count), 0);
  detail::parallel_for(outcome.size(), [&](std::size_t r) {
    Rng rng = make_rng(seed, {0x6f6fULL, static_cast<std::uint64_t>(r)});
    const CountData boot = sample_multinomial(table.probs, data.n(), rng);
    const FitResult f = fit(grid, boot, beta, refit);
    if (!f.converged) {
      outcome[r] = -1;
      return;
    }
    outcome[r] = gof_statistic(boot, f.theta_hat, grid) > s ? 1 : 0;
  });

  std::int64_t exceed = 0;
  std::int64_t dropped = 0;
  for (int o : outcome) {
    if (o < 0) ++dropped;
    if (o > 0) ++exceed;
  }
  const std::int64_t used = bootstrap_count - dropped;
  GofReport report{s,
                   used > 0 ? static_cast<double>(exceed) / static_cast<double>(used)
                            : std::numeric_limits<double>::quiet_NaN(),
                   bootstrap_count,
                   used,
                   dropped,
                   expected_counts(data, theta_hat, grid),
                   theta_hat,
                   base.converged,
                   std::nullopt};
  if (static_cast<double>(dropped) > 0.01 * static_cast<double>(bootstrap_count)) {
    std::ostringstream msg;
    msg << dropped << " of " << bootstrap_count << " bootstrap refits did not converge";
    report.warning = msg.str();
  }
  return report;
}

}  // namespace mocrisk
