#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/design.hpp"
#include "oracles.hpp"

using namespace mocrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Theta kTheta{0.15, 0.02, 0.07};

ParetoIndividual point(double f1, double f2) {
  ParetoIndividual p;
  p.phi1 = f1;
  p.phi2 = f2;
  p.feasible = true;
  return p;
}

std::vector<ParetoIndividual> random_population(std::mt19937_64& rng, std::size_t n, int levels) {
  // Coarse integer objectives so ties and duplicates actually occur.
  std::uniform_int_distribution<int> v(0, levels);
  std::vector<ParetoIndividual> pop;
  for (std::size_t i = 0; i < n; ++i) pop.push_back(point(v(rng), v(rng)));
  return pop;
}

}  // namespace

TEST_CASE("cost objective", "[design]") {
  const CostModel cost;
  CHECK_THAT(phi1_cost(InspectionGrid({10.0, 50.0}), kTheta, cost), WithinRel(10.0 + 20.0 + 40.0 * (1.0 - std::exp(-12.0)), 1e-14));
  CHECK_THAT(phi1_cost(InspectionGrid({10.0, 50.0}), kTheta, cost), WithinAbs(69.9997542, 1e-7));
  CHECK_THAT(phi1_cost(InspectionGrid({1e-12}), kTheta, cost), WithinAbs(30.0, 1e-9));
  CHECK_THAT(phi1_cost(InspectionGrid({1e4}), kTheta, cost), WithinAbs(70.0, 1e-9));
}

TEST_CASE("precision objective", "[design]") {
  const InspectionGrid grid({5.0, 12.0, 30.0});
  const Eigen::Matrix3d j0 = j_matrix(kTheta, grid, TuningBeta(0.0));
  CHECK_THAT(phi2_precision(grid, kTheta, TuningBeta(0.0)), WithinRel(1.0 / j0.determinant(), 1e-10));

  const Eigen::Matrix3d sigma = sandwich(kTheta, grid, TuningBeta(0.5)).sigma;
  const double eig_product = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(sigma).eigenvalues().prod();
  CHECK_THAT(phi2_precision(grid, kTheta, TuningBeta(0.5)), WithinRel(eig_product, 1e-10));
  CHECK_THAT(phi2_precision(grid, kTheta, TuningBeta(0.5)), WithinRel(sigma.partialPivLu().determinant(), 1e-10));

  // a repeated time adds only an empty interval
  const auto dup = InspectionGrid::non_strict({5.0, 12.0, 12.0, 30.0});
  const Eigen::Matrix3d s_dup = sandwich(kTheta, dup, TuningBeta(0.5)).sigma;
  CHECK((s_dup - sigma).cwiseAbs().maxCoeff() < 1e-10 * sigma.cwiseAbs().maxCoeff());

  // all times at zero: no information
  CHECK(std::isinf(phi2_precision(InspectionGrid::non_strict({0.0, 0.0, 0.0}), kTheta, TuningBeta(0.5))));
}

TEST_CASE("ordering violations", "[design]") {
  CHECK(violation_score(std::vector<double>{3, 2, 1}) == 3);
  CHECK(violation_score(std::vector<double>{1, 2, 3}) == 0);
  CHECK(violation_score(std::vector<double>{2, 1, 3}) == 1);
  CHECK(violation_score(std::vector<double>{1, 1, 1}) == 0);
}

TEST_CASE("evaluate folds caps into the violation", "[design]") {
  CostModel cost;
  ParetoIndividual ind;
  ind.grid = {5.0, 12.0, 30.0};
  evaluate(ind, kTheta, TuningBeta(0.5), cost);
  CHECK(ind.feasible);
  CHECK(ind.violation == 0);
  CHECK(std::isfinite(ind.phi1));

  ind.grid = {30.0, 12.0, 5.0};
  evaluate(ind, kTheta, TuningBeta(0.5), cost);
  CHECK_FALSE(ind.feasible);
  CHECK(ind.violation == 3);
  CHECK(ind.phi1 == kInf);

  cost.c1 = 40.0;  // every schedule here costs more
  cost.tau_star = 20.0;
  ind.grid = {5.0, 12.0, 30.0};
  evaluate(ind, kTheta, TuningBeta(0.5), cost);
  CHECK(ind.violation == 2);
}

TEST_CASE("dominance", "[design]") {
  CHECK(dominates(point(1, 1), point(2, 2)));
  CHECK_FALSE(dominates(point(1, 2), point(2, 1)));
  CHECK_FALSE(dominates(point(2, 1), point(1, 2)));
  CHECK_FALSE(dominates(point(1, 1), point(1, 1)));
  CHECK(dominates(point(1, 1), point(1, 2)));
}

TEST_CASE("non-dominated sorting", "[design]") {
  std::vector<ParetoIndividual> line;
  for (int i = 0; i < 6; ++i) line.push_back(point(i, 5 - i));
  const auto fronts = nondominated_sort(line);
  CHECK(fronts.size() == 1);
  for (const auto& p : line) CHECK(p.rank == 1);

  std::vector<ParetoIndividual> chain;
  for (int i = 5; i >= 1; --i) chain.push_back(point(i, i));
  nondominated_sort(chain);
  for (int i = 0; i < 5; ++i) CHECK(chain[static_cast<std::size_t>(i)].rank == 5 - i);

  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    auto pop = random_population(rng, 100, 12);
    const auto expected = oracle::brute_force_ranks(pop);
    const auto fronts_r = nondominated_sort(pop);
    std::size_t covered = 0;
    for (const auto& f : fronts_r) covered += f.size();
    CHECK(covered == pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) REQUIRE(pop[i].rank == expected[i]);
  }
}

TEST_CASE("crowding distance", "[design]") {
  std::vector<ParetoIndividual> two{point(1, 2), point(2, 1)};
  const std::vector<std::size_t> both{0, 1};
  crowding_distance(two, both);
  CHECK(two[0].crowding == kInf);
  CHECK(two[1].crowding == kInf);

  std::vector<ParetoIndividual> three{point(0, 2), point(1, 1), point(2, 0)};
  const std::vector<std::size_t> all{0, 1, 2};
  crowding_distance(three, all);
  CHECK_THAT(three[1].crowding, WithinAbs(2.0, 1e-15));
  CHECK(three[0].crowding == kInf);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<ParetoIndividual> pop;
    std::vector<std::pair<double, double>> pts;
    const int n = 3 + rep % 20;
    for (int i = 0; i < n; ++i) {
      const double x = u(rng);
      pop.push_back(point(x, 10.0 - x + 0.1 * u(rng)));
      pts.emplace_back(pop.back().phi1, pop.back().phi2);
    }
    std::vector<std::size_t> front(pop.size());
    for (std::size_t i = 0; i < front.size(); ++i) front[i] = i;
    crowding_distance(pop, front);
    const auto ref = oracle::clean_room_crowding(pts);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (std::isinf(ref[i])) {
        CHECK(std::isinf(pop[i].crowding));
      } else {
        CHECK_THAT(pop[i].crowding, WithinRel(ref[i], 1e-12));
      }
    }
  }

  // a flat objective carries no density information
  std::vector<ParetoIndividual> flat{point(1, 3), point(1, 2), point(1, 1), point(1, 0)};
  const std::vector<std::size_t> f4{0, 1, 2, 3};
  crowding_distance(flat, f4);
  CHECK_THAT(flat[1].crowding, WithinAbs(2.0 / 3.0, 1e-15));
}

TEST_CASE("crowded comparison and tournament", "[design]") {
  auto a = point(1, 1);
  auto b = point(2, 2);
  a.rank = 1;
  b.rank = 2;
  CHECK(crowded_compare(a, b));
  CHECK_FALSE(crowded_compare(b, a));
  b.rank = 1;
  a.crowding = 0.5;
  b.crowding = 1.5;
  CHECK(crowded_compare(b, a));

  std::vector<ParetoIndividual> pop{a, b, point(0, 0), point(0, 0)};
  pop[2].feasible = false;
  pop[2].violation = 2;
  pop[3].feasible = false;
  pop[3].violation = 1;
  CHECK(binary_tournament(pop, 0, 2) == 0);
  CHECK(binary_tournament(pop, 2, 0) == 0);
  CHECK(binary_tournament(pop, 2, 3) == 3);
  CHECK(binary_tournament(pop, 0, 1) == 1);
}

TEST_CASE("simulated binary crossover", "[design]") {
  CHECK(sbx_spread(0.5, 20.0) == 1.0);
  const std::vector<double> p1{10.0, 20.0, 30.0};
  const std::vector<double> p2{15.0, 5.0, 60.0};
  const std::vector<double> ones{1.0, 1.0, 1.0};
  auto [c1, c2] = sbx_children(p1, p2, ones);
  CHECK(c1 == p1);
  CHECK(c2 == p2);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<double> spreads{sbx_spread(u(rng), 20.0), sbx_spread(u(rng), 2.0), sbx_spread(u(rng), 0.5)};
    auto [d1, d2] = sbx_children(p1, p2, spreads);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs((d1[i] + d2[i]) - (p1[i] + p2[i])) <= 4.0 * 2.220446049250313e-16 * (std::abs(d1[i]) + std::abs(d2[i])));
    }
  }

  // E[spread] against quadrature of its density
  const double eta = 20.0;
  const auto density = [&](double b) {
    return b <= 1.0 ? 0.5 * (eta + 1.0) * std::pow(b, eta) : 0.5 * (eta + 1.0) / std::pow(b, eta + 2.0);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double mean_exact = gauss_kronrod<double, 61>::integrate([&](double b) { return b * density(b); }, 0.0, 1.0) +
                            gauss_kronrod<double, 61>::integrate([&](double b) { return b * density(b); }, 1.0, INFINITY);
  Rng mrng = make_rng(8, {1});
  const int draws = 100000;
  double s = 0.0, s2 = 0.0;
  for (int d = 0; d < draws; ++d) {
    const double b = sbx_spread(uniform01(mrng), eta);
    s += b;
    s2 += b * b;
  }
  const double mean = s / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean - mean_exact) < 4.0 * se);

  GaConfig config;
  config.crossover_prob = 0.0;
  Rng crng = make_rng(1, {1});
  auto [e1, e2] = sbx_crossover(p1, p2, config, crng);
  CHECK(e1 == p1);
  CHECK(e2 == p2);
  config.crossover_prob = 1.0;
  config.crossover_index = 0.1;
  for (int rep = 0; rep < 200; ++rep) {
    auto [f1, f2] = sbx_crossover(p1, p2, config, crng);
    for (double x : f1) CHECK((x >= 0.0 && x <= 70.0));
    for (double x : f2) CHECK((x >= 0.0 && x <= 70.0));
  }
}

TEST_CASE("polynomial mutation", "[design]") {
  CHECK(polynomial_delta_q(0.5, 0.3, 20.0) == 0.0);
  CHECK(polynomial_delta_q(0.5, 0.0, 20.0) == 0.0);
  for (double r : {0.0, 0.1, 0.4, 0.6, 0.9, 0.999999}) CHECK(std::abs(polynomial_delta_q(r, 0.0, 20.0)) <= 1.0);

  Rng rng = make_rng(4, {1});
  const int draws = 100000;
  double s = 0.0, s2 = 0.0;
  for (int d = 0; d < draws; ++d) {
    const double q = polynomial_delta_q(uniform01(rng), 0.5, 20.0);
    s += q;
    s2 += q * q;
  }
  const double mean = s / draws;
  CHECK(std::abs(mean) < 4.0 * std::sqrt((s2 / draws - mean * mean) / draws));

  GaConfig config;
  config.mutation_prob = 1.0;
  config.mutation_index = 0.5;
  for (int rep = 0; rep < 500; ++rep) {
    const auto m = polynomial_mutation(std::vector<double>{0.0, 35.0, 70.0}, config, rng);
    for (double x : m) CHECK((x >= 0.0 && x <= 70.0));
  }
  config.mutation_prob = 0.0;
  CHECK(polynomial_mutation(std::vector<double>{1.0, 2.0}, config, rng) == std::vector<double>{1.0, 2.0});
  CHECK_THAT(GaConfig{}.effective_mutation_prob(), WithinRel(1.0 / 3.0, 1e-15));
}

TEST_CASE("two-objective hypervolume", "[design]") {
  const std::vector<std::pair<double, double>> one{{1.0, 1.0}};
  CHECK(hypervolume_2d(one, {3.0, 3.0}) == 4.0);
  const std::vector<std::pair<double, double>> two{{1.0, 2.0}, {2.0, 1.0}, {2.5, 2.5}};
  CHECK(hypervolume_2d(two, {3.0, 3.0}) == 3.0);
  const std::vector<std::pair<double, double>> outside{{4.0, 1.0}};
  CHECK(hypervolume_2d(outside, {3.0, 3.0}) == 0.0);
}

TEST_CASE("NSGA-II run", "[design]") {
  GaConfig config;
  config.population_size = 20;
  config.generations = 15;
  config.seed = 42;
  const CostModel cost;
  const Nsga2Result a = nsga2_run(kTheta, TuningBeta(0.5), cost, config);
  const Nsga2Result b = nsga2_run(kTheta, TuningBeta(0.5), cost, config);
  REQUIRE(a.population.size() == 20);
  CHECK(a.history.size() == 16);
  for (std::size_t i = 0; i < a.population.size(); ++i) CHECK(a.population[i].grid == b.population[i].grid);

  for (const auto& ind : a.population) {
    for (double t : ind.grid) CHECK((t >= 0.0 && t <= 70.0));
  }
  for (const auto& x : a.front) {
    for (const auto& y : a.front) CHECK_FALSE(dominates(x, y));
  }
  for (std::size_t g = 1; g < a.history.size(); ++g) {
    CHECK(a.history[g].hypervolume >= a.history[g - 1].hypervolume);
  }
  CHECK(a.unique_front_size == unique_grid_count(a.front));

  config.population_size = 7;
  CHECK_THROWS_AS(nsga2_run(kTheta, TuningBeta(0.5), cost, config), std::invalid_argument);
}
