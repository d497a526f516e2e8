#pragma once

// Inspection-schedule design: cost and precision objectives and an NSGA-II
// search over K inspection times.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mocrisk/estimation.hpp"
#include "mocrisk/model.hpp"
#include "mocrisk/rng.hpp"

namespace mocrisk {

struct CostModel {
  double c0 = 10.0;
  double cn = 1.0;
  double cf = 2.0;
  std::int64_t n = 20;
  double c1 = std::numeric_limits<double>::infinity();
  double c2 = std::numeric_limits<double>::infinity();
  double tau_star = 70.0;

  void validate() const;
};

struct GaConfig {
  std::size_t population_size = 50;
  std::size_t generations = 100;
  std::size_t dimension = 3;
  double crossover_prob = 0.9;
  double crossover_index = 20.0;
  /// Defaults to 1 / dimension.
  std::optional<double> mutation_prob;
  double mutation_index = 20.0;
  double lower = 0.0;
  double upper = 70.0;
  std::uint64_t seed = 1;

  double effective_mutation_prob() const;
  void validate() const;
};

inline constexpr int kUnranked = 0;

struct ParetoIndividual {
  /// Candidate times in evolution order (not necessarily sorted).
  std::vector<double> grid;
  double phi1 = std::numeric_limits<double>::infinity();
  double phi2 = std::numeric_limits<double>::infinity();
  int violation = 0;
  int rank = kUnranked;
  double crowding = 0.0;
  bool feasible = false;
};

/// Phi1 = C0 + Cn n + Cf n (1 - exp(-lambda tau_K)).
double phi1_cost(const InspectionGrid& grid, const Theta& theta, const CostModel& cost);

/// Phi2 = det(J^-1 K J^-1); +inf when J is singular.
double phi2_precision(const InspectionGrid& grid, const Theta& theta, TuningBeta beta);

/// Number of pairs i < k with tau_k < tau_i.
int violation_score(std::span<const double> grid);

/// Fills objectives, violation and feasibility. Objectives come from the
/// sorted times; violation adds one per missed cap to the inversion count.
/// Infeasible individuals carry (+inf, +inf) so they rank behind every
/// feasible one.
void evaluate(ParetoIndividual& ind, const Theta& theta, TuningBeta beta, const CostModel& cost);

bool dominates(const ParetoIndividual& a, const ParetoIndividual& b);

/// Peeling sort; assigns rank (1 = non-dominated) to every member and returns
/// the fronts as index lists.
std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<ParetoIndividual>& population);

/// Crowding distance over the members listed in `front`.
void crowding_distance(std::vector<ParetoIndividual>& population, std::span<const std::size_t> front);

/// True when a is preferred to b (lower rank, then larger crowding; a full
/// tie prefers a).
bool crowded_compare(const ParetoIndividual& a, const ParetoIndividual& b);

/// Index of the winner among {ia, ib}.
std::size_t binary_tournament(const std::vector<ParetoIndividual>& population, std::size_t ia,
                              std::size_t ib);

/// Spread factor of simulated binary crossover for uniform draw r.
double sbx_spread(double r, double eta);

/// Children 0.5[(1 +- b) p1 + (1 -+ b) p2] per coordinate, without clamping.
std::pair<std::vector<double>, std::vector<double>> sbx_children(std::span<const double> p1,
                                                                 std::span<const double> p2,
                                                                 std::span<const double> spreads);

/// With probability Pc, one spread per coordinate; children clamped to bounds.
std::pair<std::vector<double>, std::vector<double>> sbx_crossover(std::span<const double> p1,
                                                                  std::span<const double> p2,
                                                                  const GaConfig& config, Rng& rng);

/// Mutation step delta_q for draw r and normalised distance to the nearest bound.
double polynomial_delta_q(double r, double delta, double eta);

std::vector<double> polynomial_mutation(std::span<const double> grid, const GaConfig& config, Rng& rng);

/// Area dominated by the points and bounded by `reference`; points not
/// strictly better than the reference in both objectives are ignored.
double hypervolume_2d(std::span<const std::pair<double, double>> points, std::pair<double, double> reference);

struct GenerationStats {
  std::size_t generation;
  std::size_t front_size;
  std::size_t unique_front_size;
  double hypervolume;
};

struct Nsga2Result {
  std::vector<ParetoIndividual> population;
  /// Feasible rank-1 members of the final population, duplicates kept.
  std::vector<ParetoIndividual> front;
  std::size_t unique_front_size;
  /// Entry 0 describes the initial population.
  std::vector<GenerationStats> history;
  std::pair<double, double> hypervolume_reference;
};

/// Feasible rank-1 members of a ranked population.
std::vector<ParetoIndividual> feasible_front(const std::vector<ParetoIndividual>& population);

/// Number of distinct time vectors among the individuals.
std::size_t unique_grid_count(const std::vector<ParetoIndividual>& individuals);

Nsga2Result nsga2_run(const Theta& theta, TuningBeta beta, const CostModel& cost, const GaConfig& config);

}  // namespace mocrisk
