#include "report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace mocrisk::cli {
namespace {

std::ostream& precise(std::ostream& out) { return out << std::setprecision(12); }

const char* estimator_name(double beta) { return beta == 0.0 ? "MLE" : "DPDE"; }

}  // namespace

std::string format_list(const std::vector<double>& values) {
  std::ostringstream s;
  s << std::setprecision(12);
  for (std::size_t i = 0; i < values.size(); ++i) s << (i ? "," : "") << values[i];
  return s.str();
}

std::string format_theta(const Theta& theta) {
  return format_list({theta.lambda0(), theta.lambda1(), theta.lambda2()});
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
  precise(out) << "estimator,beta,lambda0,lambda1,lambda2,bt_bias0,bt_bias1,bt_bias2,bt_used,objective,"
                  "iterations,converged\n";
  for (const auto& r : rows) {
    const Theta& t = r.fit.theta_hat;
    out << estimator_name(r.beta) << ',' << r.beta << ',' << t.lambda0() << ',' << t.lambda1() << ','
        << t.lambda2();
    for (std::size_t j = 0; j < 3; ++j) {
      out << ',';
      if (r.bootstrap_bias) out << (*r.bootstrap_bias)[j];
    }
    out << ',' << r.bootstrap_used << ',' << r.fit.objective_value << ',' << r.fit.iterations << ','
        << (r.fit.converged ? "true" : "false") << '\n';
  }
}

void write_wald_csv(std::ostream& out, const Theta& theta, double beta, std::int64_t n, const WaldReport& report) {
  precise(out) << "beta,lambda0,lambda1,lambda2,n,contrast,statistic,critical_value,alpha,p_value,reject\n";
  out << beta << ',' << theta.lambda0() << ',' << theta.lambda1() << ',' << theta.lambda2() << ',' << n << ",\""
      << format_list({report.contrast[0], report.contrast[1], report.contrast[2]}) << "\"," << report.statistic
      << ',' << report.critical_value << ',' << report.alpha << ',' << report.p_value << ','
      << (report.reject ? "true" : "false") << '\n';
}

void write_power_csv(std::ostream& out, const PowerTable& table) {
  precise(out) << "lambda0,lambda1,lambda2";
  for (double b : table.betas) out << ",power_beta_" << b;
  const bool simulated = !table.rows.empty() && !table.rows.front().simulated_rejection.empty();
  if (simulated) {
    for (double b : table.betas) out << ",simulated_beta_" << b;
  }
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.theta_star.lambda0() << ',' << row.theta_star.lambda1() << ',' << row.theta_star.lambda2();
    for (double p : row.power) out << ',' << p;
    for (double p : row.simulated_rejection) out << ',' << p;
    out << '\n';
  }
}

void write_gof_csv(std::ostream& out, const std::vector<std::pair<double, GofReport>>& reports) {
  precise(out) << "estimator,beta,lambda0,lambda1,lambda2,statistic,p_value,bootstrap,used,dropped,warning\n";
  for (const auto& [beta, r] : reports) {
    out << estimator_name(beta) << ',' << beta << ',' << r.theta_hat.lambda0() << ',' << r.theta_hat.lambda1()
        << ',' << r.theta_hat.lambda2() << ',' << r.statistic << ',' << r.p_value << ',' << r.bootstrap_count
        << ',' << r.used << ',' << r.dropped << ",\"" << r.warning.value_or("") << "\"\n";
  }
}

void write_expected_csv(std::ostream& out, const InspectionGrid& grid, const CountData& data,
                        const std::vector<std::pair<double, GofReport>>& reports) {
  precise(out) << "cell,observed";
  for (const auto& entry : reports) out << ",expected_beta_" << entry.first;
  out << '\n';
  for (std::size_t l = 0; l < data.size(); ++l) {
    out << cell_label(grid, l) << ',' << data[l];
    for (const auto& entry : reports) out << ',' << entry.second.expected_counts[l];
    out << '\n';
  }
}

void write_pareto_csv(std::ostream& out, const std::vector<ParetoIndividual>& population) {
  const std::size_t k = population.empty() ? 0 : population.front().grid.size();
  precise(out);
  for (std::size_t i = 0; i < k; ++i) out << "tau" << i + 1 << ',';
  out << "phi1,phi2,violation,rank,crowding,feasible,front\n";
  for (const auto& ind : population) {
    for (double t : ind.grid) out << t << ',';
    out << ind.phi1 << ',' << ind.phi2 << ',' << ind.violation << ',' << ind.rank << ',' << ind.crowding << ','
        << (ind.feasible ? "true" : "false") << ',' << (ind.feasible && ind.rank == 1 ? "true" : "false") << '\n';
  }
}

void write_history_csv(std::ostream& out, const std::vector<GenerationStats>& history) {
  precise(out) << "generation,front_size,unique_front_size,hypervolume\n";
  for (const auto& h : history) {
    out << h.generation << ',' << h.front_size << ',' << h.unique_front_size << ',' << h.hypervolume << '\n';
  }
}

void write_bias_csv(std::ostream& out, const std::string& scenario, const BiasReport& report, bool header) {
  precise(out);
  if (header) {
    out << "scenario,data,estimator,beta,bias0,bias1,bias2,se0,se1,se2,used,failed\n";
  }
  for (const auto& r : report.rows) {
    out << scenario << ',' << r.data << ',' << estimator_name(r.beta) << ',' << r.beta;
    for (double b : r.mean_bias) out << ',' << b;
    for (double s : r.std_error) out << ',' << s;
    out << ',' << r.used << ',' << r.failed << '\n';
  }
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

}  // namespace mocrisk::cli
