#include <catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/errors.hpp"
#include "mocrisk/hypothesis.hpp"
#include "oracles.hpp"

using namespace mocrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const InspectionGrid kGrid{{0.2, 0.3, 0.4}};

}  // namespace

TEST_CASE("chi-square critical values", "[hypothesis]") {
  CHECK_THAT(chi_square_upper_quantile(0.05), WithinRel(3.841458820694124, 1e-12));
  CHECK_THAT(chi_square_upper_quantile(0.01), WithinRel(6.634896601021214, 1e-12));
  CHECK_THAT(chi_square_upper_quantile(0.05, 2.0), WithinRel(5.991464547107979, 1e-12));
  CHECK_THROWS_AS(chi_square_upper_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(chi_square_upper_quantile(1.0), std::invalid_argument);
}

TEST_CASE("Wald statistic", "[hypothesis]") {
  const Eigen::Vector3d a0 = default_contrast();
  const WaldReport null = wald_test(Theta(4.5, 3.0, 3.0), kGrid, TuningBeta(0.5), 20, 0.05, a0);
  CHECK(null.statistic == 0.0);
  CHECK_FALSE(null.reject);
  CHECK_THAT(null.p_value, WithinAbs(1.0, 1e-15));

  const Theta t(4.5, 2.5, 4.0);
  const WaldReport r = wald_test(t, kGrid, TuningBeta(0.5), 200, 0.05, a0);
  const double var = a0.dot(sandwich(t, kGrid, TuningBeta(0.5)).sigma * a0);
  CHECK_THAT(r.statistic, WithinRel(200.0 * 1.5 * 1.5 / var, 1e-13));
  CHECK(r.reject == (r.statistic >= r.critical_value));
  CHECK_THAT(r.p_value, WithinRel(std::erfc(std::sqrt(r.statistic / 2.0)), 1e-10));

  const WaldReport flipped = wald_test(t, kGrid, TuningBeta(0.5), 200, 0.05, -a0);
  CHECK_THAT(flipped.statistic, WithinRel(r.statistic, 1e-14));
  CHECK_THROWS_AS(wald_test(t, kGrid, TuningBeta(0.5), 0, 0.05, a0), std::invalid_argument);
}

TEST_CASE("power approximation", "[hypothesis]") {
  const Eigen::Vector3d a0 = default_contrast();
  const Theta t(6.3, 2.0, 5.5);
  for (double b : {0.2, 1.0}) {
    const PowerReport r = wald_power_report(t, kGrid, TuningBeta(b), 20, 0.05, a0);
    const Eigen::Matrix3d sigma = sandwich(t, kGrid, TuningBeta(b)).sigma;
    const double v = a0.dot(sigma * a0);
    CHECK_THAT(r.m, WithinRel(3.5 * 3.5 / v, 1e-13));
    CHECK_THAT(r.sigma2, WithinRel(4.0 * r.m, 1e-10));

    // gradient of m(., theta*) by finite differences, Sigma held at theta*
    const auto m_of = [&](const std::array<double, 3>& x) {
      const double c = a0.dot(Eigen::Vector3d(x[0], x[1], x[2]));
      return c * c / v;
    };
    const auto g = oracle::central_gradient(m_of, {6.3, 2.0, 5.5}, 1e-6);
    const Eigen::Vector3d grad(g[0], g[1], g[2]);
    CHECK_THAT(grad.dot(sigma * grad), WithinRel(r.sigma2, 1e-8));

    const boost::math::normal phi;
    const double z = (chi_square_upper_quantile(0.05) / std::sqrt(20.0) - std::sqrt(20.0) * r.m) / std::sqrt(r.sigma2);
    CHECK_THAT(r.power, WithinRel(boost::math::cdf(boost::math::complement(phi, z)), 1e-12));
  }
  CHECK_THROWS_AS(wald_power(Theta(4.5, 3.0, 3.0), kGrid, TuningBeta(0.5), 20, 0.05, a0), NullPointError);
  // power grows with the sample size
  CHECK(wald_power(t, kGrid, TuningBeta(0.5), 2000, 0.05, a0) > wald_power(t, kGrid, TuningBeta(0.5), 20, 0.05, a0));
}

TEST_CASE("goodness-of-fit statistic", "[hypothesis]") {
  const Theta t(4.5, 2.5, 3.5);
  const CountData d({2, 4, 3, 5, 5, 2, 1, 1, 3, 4});
  const auto p = oracle::cell_probs(4.5, 2.5, 3.5, kGrid.times());
  double s = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) s += std::abs(static_cast<double>(d[l]) - 30.0 * p[l]);
  CHECK_THAT(gof_statistic(d, t, kGrid), WithinRel(s, 1e-13));
  const auto e = expected_counts(d, t, kGrid);
  double total = 0.0;
  for (double x : e) total += x;
  CHECK_THAT(total, WithinRel(30.0, 1e-14));
  CHECK_THROWS_AS(gof_statistic(CountData({1, 1, 1, 1}), t, kGrid), std::invalid_argument);
}

TEST_CASE("bootstrap p-value", "[hypothesis]") {
  const CountData d({2, 4, 3, 5, 5, 2, 1, 1, 3, 4});
  FitConfig c;
  c.learning_rate = 0.002;
  const GofReport a = gof_bootstrap_pvalue(d, kGrid, TuningBeta(0.0), 60, 3, c);
  const GofReport b = gof_bootstrap_pvalue(d, kGrid, TuningBeta(0.0), 60, 3, c);
  CHECK(a.p_value == b.p_value);
  CHECK(a.used + a.dropped == 60);
  CHECK(a.p_value >= 0.0);
  CHECK(a.p_value <= 1.0);
  CHECK_THAT(a.statistic, WithinRel(gof_statistic(d, a.theta_hat, kGrid), 1e-14));
  CHECK_THROWS_AS(gof_bootstrap_pvalue(d, kGrid, TuningBeta(0.0), 0, 3, c), std::invalid_argument);
}
