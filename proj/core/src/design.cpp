#include "mocrisk/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/LU>

#include "mocrisk/asymptotics.hpp"
#include "mocrisk/errors.hpp"
#include "parallel.hpp"

namespace mocrisk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> clamped(std::vector<double> v, double lo, double hi) {
  for (double& x : v) x = std::clamp(x, lo, hi);
  return v;
}

ParetoIndividual fresh(std::vector<double> grid) {
  ParetoIndividual ind;
  ind.grid = std::move(grid);
  return ind;
}

void rank_and_crowd(std::vector<ParetoIndividual>& population) {
  for (const auto& front : nondominated_sort(population)) crowding_distance(population, front);
}

std::vector<std::pair<double, double>> objective_points(const std::vector<ParetoIndividual>& front) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(front.size());
  for (const auto& ind : front) pts.emplace_back(ind.phi1, ind.phi2);
  return pts;
}

// Reference point just beyond the worst finite feasible objectives.
std::pair<double, double> reference_point(const std::vector<ParetoIndividual>& population) {
  double lo1 = kInf, hi1 = -kInf, lo2 = kInf, hi2 = -kInf;
  for (const auto& ind : population) {
    if (!ind.feasible || !std::isfinite(ind.phi1) || !std::isfinite(ind.phi2)) continue;
    lo1 = std::min(lo1, ind.phi1);
    hi1 = std::max(hi1, ind.phi1);
    lo2 = std::min(lo2, ind.phi2);
    hi2 = std::max(hi2, ind.phi2);
  }
  if (!std::isfinite(hi1)) return {kInf, kInf};
  const auto pad = [](double lo, double hi) { return hi + 0.1 * (hi - lo) + 1e-12 * std::max(1.0, std::abs(hi)); };
  return {pad(lo1, hi1), pad(lo2, hi2)};
}

}  // namespace

void CostModel::validate() const {
  if (!(c0 >= 0.0) || !(cn >= 0.0) || !(cf >= 0.0)) throw std::invalid_argument("costs must be non-negative");
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(tau_star > 0.0)) throw std::invalid_argument("caps must be positive");
  if (n < 1) throw std::invalid_argument("design sample size must be positive");
}

double GaConfig::effective_mutation_prob() const {
  return mutation_prob.value_or(1.0 / static_cast<double>(dimension));
}

void GaConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    throw std::invalid_argument("population size must be even and at least 2");
  }
  if (dimension < 1) throw std::invalid_argument("dimension must be at least 1");
  const double pm = effective_mutation_prob();
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0) || !(pm >= 0.0 && pm <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (!(crossover_index > 0.0) || !(mutation_index > 0.0)) {
    throw std::invalid_argument("distribution indices must be positive");
  }
  if (!(upper > lower) || !(lower >= 0.0) || !std::isfinite(upper)) {
    throw std::invalid_argument("bounds must satisfy 0 <= lower < upper");
  }
}

double phi1_cost(const InspectionGrid& grid, const Theta& theta, const CostModel& cost) {
  const double n = static_cast<double>(cost.n);
  const double expected_failures = -n * std::expm1(-theta.total() * grid.horizon());
  return cost.c0 + cost.cn * n + cost.cf * expected_failures;
}

double phi2_precision(const InspectionGrid& grid, const Theta& theta, TuningBeta beta) {
  try {
    return sandwich(theta, grid, beta).sigma.determinant();
  } catch (const SingularMatrixError&) {
    return kInf;
  }
}

int violation_score(std::span<const double> grid) {
  int count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) count += grid[i] - grid[k] < 0.0 ? 1 : 0;
  }
  return count;
}

void evaluate(ParetoIndividual& ind, const Theta& theta, TuningBeta beta, const CostModel& cost) {
  ind.violation = violation_score(ind.grid);
  // Caps are judged on the sorted times so every candidate gets a score.
  std::vector<double> sorted = ind.grid;
  std::sort(sorted.begin(), sorted.end());
  const InspectionGrid grid = InspectionGrid::non_strict(sorted);
  ind.phi1 = phi1_cost(grid, theta, cost);
  ind.phi2 = phi2_precision(grid, theta, beta);
  ind.violation += (ind.phi1 >= cost.c1) + (ind.phi2 >= cost.c2) + (grid.horizon() >= cost.tau_star);
  ind.feasible = ind.violation == 0;
  if (!ind.feasible) {
    ind.phi1 = kInf;
    ind.phi2 = kInf;
  }
}

bool dominates(const ParetoIndividual& a, const ParetoIndividual& b) {
  return (a.phi1 < b.phi1 && a.phi2 <= b.phi2) || (a.phi1 <= b.phi1 && a.phi2 < b.phi2);
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<ParetoIndividual>& population) {
  const std::size_t n = population.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> dominators(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(population[p], population[q])) {
        dominated_by_me[p].push_back(q);
        ++dominators[q];
      } else if (dominates(population[q], population[p])) {
        dominated_by_me[q].push_back(p);
        ++dominators[p];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    if (dominators[p] == 0) current.push_back(p);
  }
  int rank = 1;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      population[p].rank = rank;
      for (std::size_t q : dominated_by_me[p]) {
        if (--dominators[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
    ++rank;
  }
  return fronts;
}

void crowding_distance(std::vector<ParetoIndividual>& population, std::span<const std::size_t> front) {
  for (std::size_t i : front) population[i].crowding = 0.0;
  if (front.size() <= 2) {
    for (std::size_t i : front) population[i].crowding = kInf;
    return;
  }
  std::vector<std::size_t> order(front.begin(), front.end());
  for (int obj = 0; obj < 2; ++obj) {
    const auto value = [&](std::size_t i) { return obj == 0 ? population[i].phi1 : population[i].phi2; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    population[order.front()].crowding = kInf;
    population[order.back()].crowding = kInf;
    const double span = value(order.back()) - value(order.front());
    if (!(span > 0.0) || !std::isfinite(span)) continue;
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
      population[order[k]].crowding += (value(order[k + 1]) - value(order[k - 1])) / span;
    }
  }
}

bool crowded_compare(const ParetoIndividual& a, const ParetoIndividual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  if (a.crowding != b.crowding) return a.crowding > b.crowding;
  return true;
}

std::size_t binary_tournament(const std::vector<ParetoIndividual>& population, std::size_t ia,
                              std::size_t ib) {
  const auto& a = population.at(ia);
  const auto& b = population.at(ib);
  if (a.feasible && b.feasible) return crowded_compare(a, b) ? ia : ib;
  if (a.feasible != b.feasible) return a.feasible ? ia : ib;
  return b.violation < a.violation ? ib : ia;
}

double sbx_spread(double r, double eta) {
  const double e = 1.0 / (eta + 1.0);
  return r <= 0.5 ? std::pow(2.0 * r, e) : std::pow(1.0 / (2.0 * (1.0 - r)), e);
}

std::pair<std::vector<double>, std::vector<double>> sbx_children(std::span<const double> p1,
                                                                 std::span<const double> p2,
                                                                 std::span<const double> spreads) {
  if (p1.size() != p2.size() || spreads.size() != p1.size()) {
    throw std::invalid_argument("SBX parents and spreads must have equal length");
  }
  std::vector<double> c1(p1.size());
  std::vector<double> c2(p1.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    const double b = spreads[i];
    c1[i] = 0.5 * ((1.0 + b) * p1[i] + (1.0 - b) * p2[i]);
    c2[i] = 0.5 * ((1.0 - b) * p1[i] + (1.0 + b) * p2[i]);
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> p1,
                                                                  std::span<const double> p2,
                                                                  const GaConfig& config, Rng& rng) {
  if (uniform01(rng) >= config.crossover_prob) {
    return {std::vector<double>(p1.begin(), p1.end()), std::vector<double>(p2.begin(), p2.end())};
  }
  std::vector<double> spreads(p1.size());
  for (double& b : spreads) b = sbx_spread(uniform01(rng), config.crossover_index);
  auto [c1, c2] = sbx_children(p1, p2, spreads);
  return {clamped(std::move(c1), config.lower, config.upper), clamped(std::move(c2), config.lower, config.upper)};
}

double polynomial_delta_q(double r, double delta, double eta) {
  const double e = 1.0 / (eta + 1.0);
  const double tail = std::pow(1.0 - delta, eta + 1.0);
  if (r <= 0.5) return std::pow(2.0 * r + (1.0 - 2.0 * r) * tail, e) - 1.0;
  return 1.0 - std::pow(2.0 * (1.0 - r) + 2.0 * (r - 0.5) * tail, e);
}

std::vector<double> polynomial_mutation(std::span<const double> grid, const GaConfig& config, Rng& rng) {
  const double width = config.upper - config.lower;
  const double pm = config.effective_mutation_prob();
  std::vector<double> out(grid.begin(), grid.end());
  for (double& tau : out) {
    if (!(uniform01(rng) < pm)) continue;
    const double delta = std::min(config.upper - tau, tau - config.lower) / width;
    const double dq = polynomial_delta_q(uniform01(rng), delta, config.mutation_index);
    tau = std::clamp(tau + dq * width, config.lower, config.upper);
  }
  return out;
}

double hypervolume_2d(std::span<const std::pair<double, double>> points, std::pair<double, double> reference) {
  std::vector<std::pair<double, double>> inside;
  for (const auto& p : points) {
    if (p.first < reference.first && p.second < reference.second) inside.push_back(p);
  }
  std::sort(inside.begin(), inside.end());
  double area = 0.0;
  double ceiling = reference.second;
  for (const auto& [x, y] : inside) {
    if (y >= ceiling) continue;
    area += (reference.first - x) * (ceiling - y);
    ceiling = y;
  }
  return area;
}

std::vector<ParetoIndividual> feasible_front(const std::vector<ParetoIndividual>& population) {
  std::vector<ParetoIndividual> front;
  for (const auto& ind : population) {
    if (ind.feasible && ind.rank == 1) front.push_back(ind);
  }
  return front;
}

std::size_t unique_grid_count(const std::vector<ParetoIndividual>& individuals) {
  std::set<std::vector<double>> seen;
  for (const auto& ind : individuals) seen.insert(ind.grid);
  return seen.size();
}

Nsga2Result nsga2_run(const Theta& theta, TuningBeta beta, const CostModel& cost, const GaConfig& config) {
  config.validate();
  cost.validate();
  const std::size_t n = config.population_size;
  const auto evaluate_all = [&](std::vector<ParetoIndividual>& group) {
    detail::parallel_for(group.size(), [&](std::size_t i) { evaluate(group[i], theta, beta, cost); });
  };

  std::vector<ParetoIndividual> population;
  population.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(config.seed, {0, i});
    std::vector<double> grid(config.dimension);
    for (double& t : grid) t = config.lower + (config.upper - config.lower) * uniform01(rng);
    population.push_back(fresh(std::move(grid)));
  }
  evaluate_all(population);
  rank_and_crowd(population);

  Nsga2Result result;
  result.hypervolume_reference = reference_point(population);
  const auto record = [&](std::size_t generation) {
    const auto front = feasible_front(population);
    const auto pts = objective_points(front);
    result.history.push_back(GenerationStats{generation, front.size(), unique_grid_count(front),
                                             hypervolume_2d(pts, result.hypervolume_reference)});
  };
  record(0);

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<ParetoIndividual> offspring(n);
    for (std::size_t pair = 0; pair < n / 2; ++pair) {
      Rng rng = make_rng(config.seed, {gen, pair + 1});
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const auto select = [&] {
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        return binary_tournament(population, a, b);
      };
      const std::size_t p1 = select();
      const std::size_t p2 = select();
      auto [c1, c2] = sbx_crossover(population[p1].grid, population[p2].grid, config, rng);
      offspring[2 * pair] = fresh(polynomial_mutation(c1, config, rng));
      offspring[2 * pair + 1] = fresh(polynomial_mutation(c2, config, rng));
    }
    evaluate_all(offspring);

    std::vector<ParetoIndividual> combined = std::move(population);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    const auto fronts = nondominated_sort(combined);

    std::vector<ParetoIndividual> next;
    next.reserve(n);
    for (const auto& front : fronts) {
      crowding_distance(combined, front);
      if (next.size() + front.size() <= n) {
        for (std::size_t i : front) next.push_back(combined[i]);
        continue;
      }
      std::vector<std::size_t> order(front.begin(), front.end());
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return combined[a].crowding > combined[b].crowding;
      });
      for (std::size_t k = 0; next.size() < n; ++k) next.push_back(combined[order[k]]);
      break;
    }
    population = std::move(next);
    rank_and_crowd(population);
    record(gen);
  }

  result.front = feasible_front(population);
  result.unique_front_size = unique_grid_count(result.front);
  result.population = std::move(population);
  return result;
}

}  // namespace mocrisk
