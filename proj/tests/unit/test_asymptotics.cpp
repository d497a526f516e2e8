#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/errors.hpp"
#include "mocrisk/rng.hpp"
#include "oracles.hpp"

using namespace mocrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const InspectionGrid kGrid{{0.2, 0.3, 0.4}};
const Theta kTheta{4.5, 2.5, 3.5};

// Probabilities and finite-difference gradients from the oracle formulas.
struct OracleCells {
  std::vector<double> p;
  std::vector<Eigen::Vector3d> g;
};

OracleCells oracle_cells(const Theta& t, const InspectionGrid& grid) {
  OracleCells out;
  out.p = oracle::cell_probs(t.lambda0(), t.lambda1(), t.lambda2(), grid.times());
  for (std::size_t l = 0; l < out.p.size(); ++l) {
    const auto fd = oracle::central_gradient(
        [&](const std::array<double, 3>& x) { return oracle::cell_probs(x[0], x[1], x[2], grid.times())[l]; },
        {t.lambda0(), t.lambda1(), t.lambda2()}, 1e-6);
    out.g.emplace_back(fd[0], fd[1], fd[2]);
  }
  return out;
}

double max_rel(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("J at beta = 0 is the multinomial Fisher information", "[asymptotics]") {
  for (const auto& grid : {kGrid, InspectionGrid({0.35})}) {
    const OracleCells c = oracle_cells(kTheta, grid);
    Eigen::Matrix3d fisher = Eigen::Matrix3d::Zero();
    for (std::size_t l = 0; l < c.p.size(); ++l) fisher += c.g[l] * c.g[l].transpose() / c.p[l];
    CHECK(max_rel(j_matrix(kTheta, grid, TuningBeta(0.0)), fisher) < 1e-7);
  }
}

TEST_CASE("J at beta = 0 equals expected negative Hessian of the log-likelihood", "[asymptotics]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rate(0.5, 6.0);
  for (int rep = 0; rep < 5; ++rep) {
    const Theta t(rate(rng), rate(rng), rate(rng));
    const auto p0 = oracle::cell_probs(t.lambda0(), t.lambda1(), t.lambda2(), kGrid.times());
    const auto loglik = [&](const std::array<double, 3>& x) {
      const auto p = oracle::cell_probs(x[0], x[1], x[2], kGrid.times());
      double s = 0.0;
      for (std::size_t l = 0; l < p.size(); ++l) s += p0[l] * std::log(p[l]);
      return s;
    };
    Eigen::Matrix3d info;
    const double h = 1e-4;
    const std::array<double, 3> x0{t.lambda0(), t.lambda1(), t.lambda2()};
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        auto pp = x0, pm = x0, mp = x0, mm = x0;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        info(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            -(loglik(pp) - loglik(pm) - loglik(mp) + loglik(mm)) / (4.0 * h * h);
      }
    }
    CHECK(max_rel(j_matrix(t, kGrid, TuningBeta(0.0)), info) < 1e-5);
  }
}

TEST_CASE("K entries match the term-by-term multinomial covariance", "[asymptotics]") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rate(0.5, 6.0);
  std::uniform_real_distribution<double> beta(0.05, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Theta t(rate(rng), rate(rng), rate(rng));
    const double b = beta(rng);
    const OracleCells c = oracle_cells(t, kGrid);
    const std::size_t m = c.p.size();
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
          s += std::pow(c.p[l], 2.0 * (b - 1.0)) * c.p[l] * (1.0 - c.p[l]) * c.g[l][i] * c.g[l][j];
        }
        for (std::size_t l1 = 0; l1 < m; ++l1) {
          for (std::size_t l2 = 0; l2 < m; ++l2) {
            if (l1 == l2) continue;
            s -= std::pow(c.p[l1], b - 1.0) * std::pow(c.p[l2], b - 1.0) * c.p[l1] * c.p[l2] * c.g[l1][i] * c.g[l2][j];
          }
        }
        k(i, j) = s;
      }
    }
    CHECK(max_rel(k_matrix(t, kGrid, TuningBeta(b)), k) < 1e-6);
    const Eigen::Vector3d ev =
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(k_matrix(t, kGrid, TuningBeta(b))).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10);
  }
}

TEST_CASE("K is the covariance of the per-unit estimating function", "[asymptotics]") {
  const double b = 0.5;
  const OracleCells c = oracle_cells(kTheta, kGrid);
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  for (std::size_t l = 0; l < c.p.size(); ++l) xi += std::pow(c.p[l], b) * c.g[l];
  std::discrete_distribution<std::size_t> cell(c.p.begin(), c.p.end());
  Rng rng = make_rng(17, {1});
  const int draws = 100000;
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d sum_sq = Eigen::Matrix3d::Zero();
  for (int d = 0; d < draws; ++d) {
    const std::size_t l = cell(rng);
    const Eigen::Vector3d u = std::pow(c.p[l], b - 1.0) * c.g[l] - xi;
    const Eigen::Matrix3d uu = u * u.transpose();
    sum += uu;
    sum_sq += uu.cwiseProduct(uu);
  }
  const Eigen::Matrix3d mean = sum / draws;
  const Eigen::Matrix3d se = ((sum_sq / draws - mean.cwiseProduct(mean)) / draws).cwiseSqrt();
  const Eigen::Matrix3d k = k_matrix(kTheta, kGrid, TuningBeta(b));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(i, j) - k(i, j)) < 4.0 * se(i, j));
  }
}

TEST_CASE("sandwich reduces to the inverse Fisher information at beta = 0", "[asymptotics]") {
  const SandwichCovariance s = sandwich(kTheta, kGrid, TuningBeta(0.0));
  CHECK(s.k == s.j);
  CHECK(max_rel(s.sigma, s.j.inverse()) < 1e-12);
  const Eigen::Matrix3d k0 = k_matrix(kTheta, kGrid, TuningBeta(0.0));
  CHECK((k0 - s.j).norm() <= 1e-12 * s.j.norm());
}

TEST_CASE("sandwich scales under a change of time unit", "[asymptotics]") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> rate(0.5, 6.0);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Theta t(rate(rng), rate(rng), rate(rng));
    const double s = scale(rng);
    for (double b : {0.0, 0.5}) {
      const Eigen::Matrix3d base = sandwich(t, kGrid, TuningBeta(b)).sigma;
      const Eigen::Matrix3d moved = sandwich(t.scaled(1.0 / s), kGrid.scaled(s), TuningBeta(b)).sigma;
      CHECK(max_rel(moved, base / (s * s)) < 1e-9);
    }
  }
}

TEST_CASE("guarded inverse rejects singular matrices", "[asymptotics]") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 2) = 0.0;
  CHECK_THROWS_AS(guarded_inverse(m, "M"), SingularMatrixError);
  m(2, 2) = 1e-14;
  CHECK_THROWS_AS(guarded_inverse(m, "M"), SingularMatrixError);
  m(2, 2) = 2.0;
  CHECK((guarded_inverse(m, "M") * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("influence function has zero mean under the model", "[asymptotics]") {
  const auto p = cell_table(kTheta, kGrid).probs;
  for (double b : {0.0, 0.2, 0.5, 1.0}) {
    const auto inf = influence_table(kTheta, kGrid, TuningBeta(b));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t l = 0; l < p.size(); ++l) mean += p[l] * inf[l];
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("influence function is constant on each cell", "[asymptotics]") {
  const TuningBeta b(0.5);
  const auto a = influence_point({0.21, 0.8}, kTheta, kGrid, b);
  const auto c = influence_point({0.29, 0.35}, kTheta, kGrid, b);
  CHECK(a.value == c.value);
  CHECK(a.value == influence_cell(cell_index(2, Cause::kOne), kTheta, kGrid, b));
  CHECK(a.wald_second_order == c.wald_second_order);
}

TEST_CASE("second-order Wald influence", "[asymptotics]") {
  const Theta null_theta(4.5, 3.0, 3.0);
  const Eigen::Vector3d a0 = default_contrast();
  for (double b : {0.0, 0.5, 1.0}) {
    const auto inf = influence_table(null_theta, kGrid, TuningBeta(b));
    for (std::size_t l = 0; l < kGrid.cell_count(); ++l) {
      const double v = wald_influence2_cell(l, null_theta, kGrid, TuningBeta(b), a0);
      CHECK(v >= 0.0);
      if (std::abs(a0.dot(inf[l])) == 0.0) CHECK(v == 0.0);
    }
    // symmetric rates: the simultaneous and survivor cells do not move the contrast
    CHECK_THAT(wald_influence2_cell(2, null_theta, kGrid, TuningBeta(b), a0), WithinAbs(0.0, 1e-20));
    CHECK_THAT(wald_influence2_cell(9, null_theta, kGrid, TuningBeta(b), a0), WithinAbs(0.0, 1e-20));
    CHECK(wald_influence2_cell(0, null_theta, kGrid, TuningBeta(b), a0) > 0.0);
    // sign of the contrast is irrelevant
    CHECK_THAT(wald_influence2_cell(3, null_theta, kGrid, TuningBeta(b), -a0),
               WithinRel(wald_influence2_cell(3, null_theta, kGrid, TuningBeta(b), a0), 1e-14));
  }
  CHECK_THROWS_AS(wald_influence2_cell(0, kTheta, kGrid, TuningBeta(0.5), a0), std::invalid_argument);
  CHECK_THROWS_AS(wald_influence2_cell(10, null_theta, kGrid, TuningBeta(0.5), a0), std::out_of_range);
}
