#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mocrisk/mocrisk.hpp"

namespace mocrisk::cli {

struct EstimateRow {
  double beta;
  FitResult fit;
  std::optional<std::array<double, 3>> bootstrap_bias;
  std::int64_t bootstrap_used = 0;
};

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows);
void write_wald_csv(std::ostream& out, const Theta& theta, double beta, std::int64_t n, const WaldReport& report);
void write_power_csv(std::ostream& out, const PowerTable& table);
void write_gof_csv(std::ostream& out, const std::vector<std::pair<double, GofReport>>& reports);
void write_expected_csv(std::ostream& out, const InspectionGrid& grid, const CountData& data,
                        const std::vector<std::pair<double, GofReport>>& reports);
void write_pareto_csv(std::ostream& out, const std::vector<ParetoIndividual>& population);
void write_history_csv(std::ostream& out, const std::vector<GenerationStats>& history);
void write_bias_csv(std::ostream& out, const std::string& scenario, const BiasReport& report, bool header);

/// Ordered key = value record of a run.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_list(const std::vector<double>& values);
std::string format_theta(const Theta& theta);

}  // namespace mocrisk::cli
