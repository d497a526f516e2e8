#include "mocrisk/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "mocrisk/hypothesis.hpp"
#include "parallel.hpp"

namespace mocrisk {

std::vector<BivariateObservation> sample_latent(const Theta& theta, std::int64_t n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample size must be non-negative");
  std::exponential_distribution<double> e0(theta.lambda0());
  std::exponential_distribution<double> e1(theta.lambda1());
  std::exponential_distribution<double> e2(theta.lambda2());
  std::vector<BivariateObservation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t u = 0; u < n; ++u) {
    const double u0 = e0(rng);
    const double u1 = e1(rng);
    const double u2 = e2(rng);
    out.emplace_back(std::min(u0, u1), std::min(u0, u2));
  }
  return out;
}

CountData sample_multinomial(std::span<const double> probs, std::int64_t n, Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample size must be non-negative");
  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t left = n;
  double mass_left = 1.0;
  for (std::size_t l = 0; l + 1 < probs.size() && left > 0; ++l) {
    const double q = mass_left > 0.0 ? std::clamp(probs[l] / mass_left, 0.0, 1.0) : 0.0;
    const std::int64_t draw = std::binomial_distribution<std::int64_t>(left, q)(rng);
    counts[l] = draw;
    left -= draw;
    mass_left -= probs[l];
  }
  if (!probs.empty()) counts.back() += left;
  return CountData(std::move(counts));
}

CountData tabulate(std::span<const BivariateObservation> sample, const InspectionGrid& grid) {
  std::vector<std::int64_t> counts(grid.cell_count(), 0);
  for (const auto& x : sample) ++counts[classify_cell(x, grid)];
  return CountData(std::move(counts));
}

CountData sample_counts(const Theta& theta, const InspectionGrid& grid, std::int64_t n, Rng& rng,
                        SamplingMode mode) {
  if (mode == SamplingMode::kLatent) return tabulate(sample_latent(theta, n, rng), grid);
  return sample_multinomial(cell_table(theta, grid).probs, n, rng);
}

void ScenarioConfig::validate() const {
  if (!(contamination_fraction >= 0.0 && contamination_fraction <= 1.0)) {
    throw std::invalid_argument("contamination fraction must lie in [0, 1]");
  }
  if (n < 1) throw std::invalid_argument("scenario sample size must be positive");
  if (replications < 1) throw std::invalid_argument("replications must be positive");
  if (betas.empty()) throw std::invalid_argument("at least one beta is required");
  for (double b : betas) TuningBeta{b};
  fit.validate();
}

std::vector<ScenarioConfig> reference_scenarios() {
  std::vector<ScenarioConfig> out(3);
  out[0].theta_pure = Theta(4.5, 2.5, 3.5);
  out[0].theta_contaminated = Theta(4.5 - 0.5, 2.5 - 0.6, 3.5 - 0.4);
  out[1].theta_pure = Theta(6.3, 2.1, 4.2);
  out[1].theta_contaminated = Theta(6.3 - 0.8, 2.1 - 0.5, 4.2 - 0.6);
  out[2].theta_pure = Theta(2.0, 3.0, 4.0);
  out[2].theta_contaminated = Theta(2.0 - 0.2, 3.0 - 0.1, 4.0 - 0.3);
  return out;
}

CountData sample_contaminated(const ScenarioConfig& config, Rng& rng) {
  std::bernoulli_distribution outlier(config.contamination_fraction);
  std::vector<BivariateObservation> units;
  units.reserve(static_cast<std::size_t>(config.n));
  for (std::int64_t u = 0; u < config.n; ++u) {
    const Theta& source = outlier(rng) ? config.theta_contaminated : config.theta_pure;
    units.push_back(sample_latent(source, 1, rng).front());
  }
  return tabulate(units, config.grid);
}

const BiasRow& BiasReport::find(const std::string& data, double beta) const {
  for (const auto& row : rows) {
    if (row.data == data && row.beta == beta) return row;
  }
  throw std::out_of_range("no bias row for " + data);
}

BiasReport run_bias_study(const ScenarioConfig& config) {
  config.validate();
  const std::size_t nb = config.betas.size();
  const auto reps = static_cast<std::size_t>(config.replications);
  FitConfig fit_config = config.fit;
  fit_config.initial_theta = config.theta_pure;
  const Eigen::Vector3d truth = config.theta_pure.vector();

  // errors[rep][kind][beta]; NaN marks a failed fit.
  std::vector<std::array<std::vector<Eigen::Vector3d>, 2>> errors(reps);
  detail::parallel_for(reps, [&](std::size_t r) {
    Rng pure_rng = make_rng(config.seed, {0x62696173ULL, r, 0});
    Rng cont_rng = make_rng(config.seed, {0x62696173ULL, r, 1});
    const std::array<CountData, 2> tables = {
        sample_counts(config.theta_pure, config.grid, config.n, pure_rng, SamplingMode::kLatent),
        sample_contaminated(config, cont_rng)};
    for (std::size_t kind = 0; kind < 2; ++kind) {
      errors[r][kind].resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        const FitResult f = fit(config.grid, tables[kind], TuningBeta(config.betas[b]), fit_config);
        errors[r][kind][b] = f.converged ? Eigen::Vector3d(f.theta_hat.vector() - truth)
                                         : Eigen::Vector3d::Constant(std::nan(""));
      }
    }
  });

  BiasReport report{{}, config.replications};
  static const std::array<const char*, 2> kKind = {"pure", "contaminated"};
  for (std::size_t kind = 0; kind < 2; ++kind) {
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
      std::int64_t used = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const Eigen::Vector3d& e = errors[r][kind][b];
        if (!e.allFinite()) continue;
        sum += e;
        sum_sq += e.cwiseProduct(e);
        ++used;
      }
      BiasRow row{kKind[kind], config.betas[b], {}, {}, used, config.replications - used};
      for (int j = 0; j < 3; ++j) {
        const double mean = used > 0 ? sum[j] / static_cast<double>(used) : std::nan("");
        const double var = used > 1 ? (sum_sq[j] - static_cast<double>(used) * mean * mean) /
                                          static_cast<double>(used - 1)
                                    : std::nan("");
        row.mean_bias[static_cast<std::size_t>(j)] = mean;
        row.std_error[static_cast<std::size_t>(j)] = std::sqrt(std::max(var, 0.0) / static_cast<double>(used));
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

BootstrapBias bootstrap_bias(const InspectionGrid& grid, std::int64_t n, const Theta& theta_hat,
                             TuningBeta beta, const FitConfig& config, std::int64_t replicates,
                             std::uint64_t seed) {
  if (replicates < 1) throw std::invalid_argument("bootstrap count must be at least 1");
  FitConfig refit = config;
  refit.initial_theta = theta_hat;
  const std::vector<double> probs = cell_table(theta_hat, grid).probs;
  std::vector<Eigen::Vector3d> shift(static_cast<std::size_t>(replicates));
  detail::parallel_for(shift.size(), [&](std::size_t r) {
    Rng rng = make_rng(seed, {0x627462ULL, r});
    const FitResult f = fit(grid, sample_multinomial(probs, n, rng), beta, refit);
    shift[r] = f.converged ? Eigen::Vector3d(f.theta_hat.vector() - theta_hat.vector())
                           : Eigen::Vector3d::Constant(std::nan(""));
  });
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::int64_t used = 0;
  for (const auto& s : shift) {
    if (!s.allFinite()) continue;
    sum += s;
    ++used;
  }
  BootstrapBias out{{}, used, replicates - used};
  for (int j = 0; j < 3; ++j) {
    out.bias[static_cast<std::size_t>(j)] = used > 0 ? sum[j] / static_cast<double>(used) : std::nan("");
  }
  return out;
}

std::vector<Theta> reference_power_thetas() {
  return {Theta(4.5, 2.5, 3.0), Theta(6.3, 2.0, 3.5), Theta(4.5, 2.5, 4.0), Theta(4.5, 2.5, 5.5),
          Theta(6.3, 2.0, 5.5)};
}

PowerTable run_power_study(const PowerStudyConfig& config) {
  if (config.thetas.empty()) throw std::invalid_argument("power study needs at least one theta*");
  if (config.simulation_replications < 0) throw std::invalid_argument("replications must be >= 0");
  PowerTable table{config.betas, {}};
  for (std::size_t t = 0; t < config.thetas.size(); ++t) {
    const Theta& theta = config.thetas[t];
    PowerRow row{theta, {}, {}};
    for (std::size_t b = 0; b < config.betas.size(); ++b) {
      const TuningBeta beta(config.betas[b]);
      row.power.push_back(wald_power(theta, config.grid, beta, config.n, config.alpha, config.contrast));
      if (config.simulation_replications == 0) continue;

      FitConfig fit_config = config.fit;
      fit_config.initial_theta = theta;
      const auto reps = static_cast<std::size_t>(config.simulation_replications);
      std::vector<int> reject(reps, -1);
      detail::parallel_for(reps, [&](std::size_t r) {
        Rng rng = make_rng(config.seed, {0x706f776572ULL, t, b, r});
        const CountData data = sample_counts(theta, config.grid, config.n, rng);
        const FitResult f = fit(config.grid, data, beta, fit_config);
        if (!f.converged) return;
        try {
          reject[r] = wald_test(f.theta_hat, config.grid, beta, config.n, config.alpha, config.contrast).reject;
        } catch (const std::exception&) {
          // Degenerate estimate; counted as a dropped replicate.
        }
      });
      std::int64_t used = 0;
      std::int64_t hits = 0;
      for (int v : reject) {
        if (v < 0) continue;
        ++used;
        hits += v;
      }
      row.simulated_rejection.push_back(used > 0 ? static_cast<double>(hits) / static_cast<double>(used)
                                                 : std::nan(""));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mocrisk
