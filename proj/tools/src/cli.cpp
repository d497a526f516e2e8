#include "mocrisk/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "report.hpp"

namespace mocrisk::cli {
namespace {

namespace fs = std::filesystem;

// Invalid value of a named option; reported as `error: --name: reason`.
class FieldError : public std::runtime_error {
 public:
  FieldError(const std::string& field, const std::string& what) : std::runtime_error(field + ": " + what) {}
};

template <class F>
auto checked(const std::string& field, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const FieldError&) {
    throw;
  } catch (const std::exception& e) {
    throw FieldError(field, e.what());
  }
}

struct FitOptions {
  double learning_rate = 0.01;
  double threshold = 1e-4;
  std::int64_t max_iterations = 1'000'000;
  std::string init = "3.5,1.5,2.5";
  std::string stop = "all";
  bool backtracking = false;
  int grid_search = 0;
};

struct DataOptions {
  std::string data_path;
  std::string counts_path;
  double divisor = 1.0;
};

struct Common {
  std::string grid = "0.2,0.3,0.4";
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

void add_fit_options(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--lr", o.learning_rate, "Coordinate descent learning rate h")->capture_default_str();
  cmd->add_option("--threshold", o.threshold, "Stopping threshold c")->capture_default_str();
  cmd->add_option("--max-iter", o.max_iterations, "Maximum number of sweeps")->capture_default_str();
  cmd->add_option("--init", o.init, "Initial rates l0,l1,l2")->capture_default_str();
  cmd->add_option("--stop", o.stop, "Stop when all criteria hold (all) or any holds (any)")
      ->check(CLI::IsMember({"all", "any"}))
      ->capture_default_str();
  cmd->add_flag("--backtrack", o.backtracking, "Halve h when a sweep increases the objective");
  cmd->add_option("--grid-search", o.grid_search,
                  "Lattice points per axis on [0.5,5]^3 for the initial value (0 keeps --init)")
      ->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.data_path, "CSV file with header time,cause");
  cmd->add_option("--counts", o.counts_path, "CSV file with header cell,count");
  cmd->add_option("--divisor", o.divisor, "Divide raw times by this factor")->capture_default_str();
}

void add_common(CLI::App* cmd, Common& c, bool with_grid = true) {
  if (with_grid) cmd->add_option("--grid", c.grid, "Inspection times t1,...,tK")->capture_default_str();
  cmd->add_option("--out", c.out_dir, "Directory for CSV outputs and the manifest")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

Theta parse_theta(const std::string& field, const std::string& text) {
  return checked(field, [&] {
    const auto v = parse_double_list(text);
    if (v.size() != 3) throw std::invalid_argument("expected three rates l0,l1,l2");
    return Theta(v[0], v[1], v[2]);
  });
}

InspectionGrid parse_grid(const std::string& text) {
  return checked("--grid", [&] { return InspectionGrid(parse_double_list(text)); });
}

std::vector<double> parse_betas(const std::string& text) {
  return checked("--beta", [&] {
    std::vector<double> out;
    for (double b : parse_double_list(text)) out.push_back(TuningBeta(b).value());
    return out;
  });
}

Eigen::Vector3d parse_contrast(const std::string& text) {
  return checked("--contrast", [&] {
    const auto v = parse_double_list(text);
    if (v.size() != 3) throw std::invalid_argument("expected three coefficients");
    if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) throw std::invalid_argument("contrast must be non-zero");
    return Eigen::Vector3d(v[0], v[1], v[2]);
  });
}

double parse_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw FieldError("--alpha", "must lie in (0, 1)");
  return alpha;
}

FitConfig make_fit_config(const FitOptions& o) {
  FitConfig c;
  c.learning_rate = o.learning_rate;
  c.threshold = o.threshold;
  c.max_iterations = o.max_iterations;
  c.initial_theta = parse_theta("--init", o.init);
  c.stop_rule = o.stop == "any" ? StopRule::kAnyCriterion : StopRule::kAllCriteria;
  c.backtracking = o.backtracking;
  if (!(c.learning_rate > 0.0)) throw FieldError("--lr", "must be positive");
  if (!(c.threshold > 0.0)) throw FieldError("--threshold", "must be positive");
  if (c.max_iterations < 1) throw FieldError("--max-iter", "must be at least 1");
  if (o.grid_search == 1 || o.grid_search < 0) throw FieldError("--grid-search", "must be 0 or at least 2");
  return c;
}

void record_fit(Manifest& m, const FitOptions& o) {
  m.set("fit.learning_rate", format_list({o.learning_rate}));
  m.set("fit.threshold", format_list({o.threshold}));
  m.set("fit.max_iterations", std::to_string(o.max_iterations));
  m.set("fit.init", o.init);
  m.set("fit.stop", o.stop);
  m.set("fit.backtracking", o.backtracking ? "true" : "false");
  m.set("fit.grid_search", std::to_string(o.grid_search));
}

struct LoadedData {
  CountData counts;
  std::vector<std::string> warnings;
};

LoadedData load_data(const DataOptions& o, const InspectionGrid& grid) {
  if (o.data_path.empty() == o.counts_path.empty()) {
    throw FieldError("--data", "give exactly one of --data or --counts");
  }
  if (!(o.divisor > 0.0)) throw FieldError("--divisor", "must be positive");
  if (!o.data_path.empty()) {
    auto r = checked("--data", [&] { return ingest(o.data_path, grid, o.divisor); });
    return {r.counts, r.warnings};
  }
  return checked("--counts", [&] {
    std::ifstream in(o.counts_path);
    if (!in) throw std::runtime_error("cannot open " + o.counts_path);
    return LoadedData{parse_counts_csv(in, grid, o.counts_path), {}};
  });
}

FitConfig initial_value(FitConfig config, const FitOptions& o, const InspectionGrid& grid, const CountData& data,
                        TuningBeta beta) {
  if (o.grid_search >= 2) {
    config.initial_theta = grid_search_init(grid, CellWeights::from_counts(data), beta, SearchBounds{}, o.grid_search);
  }
  return config;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "mocrisk";
  for (const auto& a : args) s += " " + a;
  return s;
}

class Output {
 public:
  Output(const std::string& dir, std::ostream& out) : dir_(dir), out_(out) {
    checked("--out", [&] {
      fs::create_directories(dir_);
      return 0;
    });
  }

  // Writes a CSV file and echoes it on stdout.
  void table(const std::string& name, const std::function<void(std::ostream&)>& write) {
    std::ostringstream buffer;
    write(buffer);
    std::ofstream file(dir_ / name);
    if (!file) throw FieldError("--out", "cannot write " + (dir_ / name).string());
    file << buffer.str();
    out_ << buffer.str();
  }

  // Writes a CSV file only.
  void file(const std::string& name, const std::function<void(std::ostream&)>& write) {
    std::ofstream f(dir_ / name);
    if (!f) throw FieldError("--out", "cannot write " + (dir_ / name).string());
    write(f);
  }

 private:
  fs::path dir_;
  std::ostream& out_;
};

Manifest base_manifest(const std::string& command, const std::vector<std::string>& args, const Common& c) {
  Manifest m;
  m.set("program", "mocrisk");
  m.set("version", kVersion);
  m.set("command", command);
  m.set("argv", join_args(args));
  m.set("seed", std::to_string(c.seed));
  m.set("grid", c.grid);
  return m;
}

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust estimation, testing and inspection design for MOBE competing risks"};
  app.name("mocrisk");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  FitOptions fit_opts;
  DataOptions data_opts;
  std::string betas_text;
  std::int64_t bootstrap = 0;
  double alpha = 0.05;
  std::string contrast_text = "0,1,-1";

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Fit the MLE and DPD estimators");
  add_common(estimate, common);
  add_data_options(estimate, data_opts);
  add_fit_options(estimate, fit_opts);
  estimate->add_option("--beta", betas_text, "DPD tuning values (the MLE is always included)")
      ->default_str("0.2,0.4,0.6,0.8,1.0");
  estimate->add_option("--bootstrap", bootstrap, "Bootstrap resamples for the bias estimate (0 = off)")
      ->default_str("1000");

  // test
  std::string theta_text;
  std::int64_t n_units = 0;
  auto* test = app.add_subcommand("test", "Wald test of a linear contrast of the rates");
  add_common(test, common);
  add_data_options(test, data_opts);
  add_fit_options(test, fit_opts);
  test->add_option("--theta", theta_text, "Estimate l0,l1,l2 to test (instead of fitting data)");
  test->add_option("--n", n_units, "Sample size behind --theta");
  test->add_option("--beta", betas_text, "Tuning parameter")->default_str("0.5");
  test->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  test->add_option("--contrast", contrast_text, "Contrast a0")->capture_default_str();

  // power
  std::vector<std::string> theta_list;
  std::int64_t power_n = 20;
  std::int64_t power_sims = 0;
  auto* power = app.add_subcommand("power", "Approximate power of the Wald test");
  add_common(power, common);
  add_fit_options(power, fit_opts);
  power->add_option("--theta", theta_list, "Alternative l0,l1,l2 (repeatable; default: reference rows)");
  power->add_option("--n", power_n, "Sample size")->capture_default_str();
  power->add_option("--beta", betas_text, "Tuning values")->default_str("0.2,0.4,0.6,0.8,1.0");
  power->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  power->add_option("--contrast", contrast_text, "Contrast a0")->capture_default_str();
  power->add_option("--simulate", power_sims, "Monte Carlo replications per cell (0 = off)")->capture_default_str();

  // gof
  auto* gof = app.add_subcommand("gof", "Parametric bootstrap goodness-of-fit test");
  add_common(gof, common);
  add_data_options(gof, data_opts);
  add_fit_options(gof, fit_opts);
  gof->add_option("--beta", betas_text, "Tuning values (0 = MLE)")->default_str("0,0.2,0.4,0.6,0.8,1.0");
  gof->add_option("--bootstrap,-B", bootstrap, "Bootstrap resamples")->default_str("10000");

  // design
  std::string design_theta = "0.15,0.02,0.07";
  std::string costs_text = "10,1,2";
  std::string caps_text = "inf,inf,70";
  std::string bounds_text = "0,70";
  std::int64_t design_n = 20;
  std::size_t pop_size = 50;
  std::size_t generations = 100;
  std::size_t dimension = 3;
  double pc = 0.9;
  double eta_c = 20.0;
  double pm = -1.0;
  double eta_m = 20.0;
  auto* design = app.add_subcommand("design", "NSGA-II search for Pareto-optimal inspection times");
  add_common(design, common, false);
  design->add_option("--theta", design_theta, "Planning rates l0,l1,l2")->capture_default_str();
  design->add_option("--beta", betas_text, "Tuning parameter")->default_str("0.5");
  design->add_option("--costs", costs_text, "C0,Cn,Cf")->capture_default_str();
  design->add_option("--caps", caps_text, "C1,C2,tau-star")->capture_default_str();
  design->add_option("--n", design_n, "Units on test")->capture_default_str();
  design->add_option("--pop-size", pop_size, "Population size (even)")->capture_default_str();
  design->add_option("--generations", generations, "Generations")->capture_default_str();
  design->add_option("--dimension", dimension, "Number of inspection times K")->capture_default_str();
  design->add_option("--bounds", bounds_text, "Lower,upper bound of every time")->capture_default_str();
  design->add_option("--pc", pc, "Crossover probability")->capture_default_str();
  design->add_option("--eta-c", eta_c, "Crossover distribution index")->capture_default_str();
  design->add_option("--pm", pm, "Mutation probability (default 1/K)");
  design->add_option("--eta-m", eta_m, "Mutation distribution index")->capture_default_str();

  // simulate
  std::string scenarios_text = "1,2,3";
  double epsilon = 0.10;
  std::int64_t reps = 1000;
  std::int64_t sim_n = 20;
  bool with_power = false;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo bias study (and power table)");
  add_common(simulate, common);
  add_fit_options(simulate, fit_opts);
  simulate->add_option("--scenario", scenarios_text, "Reference scenarios to run")->capture_default_str();
  simulate->add_option("--epsilon", epsilon, "Contamination fraction")->capture_default_str();
  simulate->add_option("--reps", reps, "Replications")->capture_default_str();
  simulate->add_option("--n", sim_n, "Units per replication")->capture_default_str();
  simulate->add_option("--beta", betas_text, "Tuning values (0 = MLE)")->default_str("0,0.2,0.4,0.6,0.8,1.0");
  simulate->add_flag("--power", with_power, "Also write the power table for the reference alternatives");
  simulate->add_option("--alpha", alpha, "Significance level for --power")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const auto default_if_empty = [&](const std::string& fallback) {
    return betas_text.empty() ? fallback : betas_text;
  };

  try {
    if (estimate->parsed()) {
      if (bootstrap == 0 && estimate->count("--bootstrap") == 0) bootstrap = 1000;
      if (bootstrap < 0) throw FieldError("--bootstrap", "must be non-negative");
      const InspectionGrid grid = parse_grid(common.grid);
      auto betas = parse_betas(default_if_empty("0.2,0.4,0.6,0.8,1.0"));
      betas.insert(betas.begin(), 0.0);
      betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
      const FitConfig base = make_fit_config(fit_opts);
      const LoadedData data = load_data(data_opts, grid);
      warn_all(err, data.warnings);
      Output output(common.out_dir, out);

      std::vector<EstimateRow> rows;
      for (std::size_t b = 0; b < betas.size(); ++b) {
        const TuningBeta beta(betas[b]);
        const FitConfig config = initial_value(base, fit_opts, grid, data.counts, beta);
        EstimateRow row{betas[b], fit(grid, data.counts, beta, config), std::nullopt, 0};
        if (!row.fit.converged) err << "warning: " << to_string(beta) << " fit did not converge\n";
        if (bootstrap > 0) {
          const auto bias = bootstrap_bias(grid, data.counts.n(), row.fit.theta_hat, beta, config, bootstrap,
                                           derive_seed(common.seed, {b}));
          row.bootstrap_bias = bias.bias;
          row.bootstrap_used = bias.used;
        }
        rows.push_back(row);
      }
      output.table("estimates.csv", [&](std::ostream& o) { write_estimates_csv(o, rows); });
      Manifest m = base_manifest("estimate", args, common);
      m.set("data", data_opts.data_path.empty() ? data_opts.counts_path : data_opts.data_path);
      m.set("divisor", format_list({data_opts.divisor}));
      m.set("n", std::to_string(data.counts.n()));
      m.set("betas", format_list(betas));
      m.set("bootstrap", std::to_string(bootstrap));
      record_fit(m, fit_opts);
      output.file("estimate_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }

    if (test->parsed()) {
      const InspectionGrid grid = parse_grid(common.grid);
      const auto betas = parse_betas(default_if_empty("0.5"));
      if (betas.size() != 1) throw FieldError("--beta", "test takes a single tuning value");
      const TuningBeta beta(betas.front());
      parse_alpha(alpha);
      const Eigen::Vector3d a0 = parse_contrast(contrast_text);
      Theta theta_hat(1.0, 1.0, 1.0);
      std::int64_t n = n_units;
      if (!theta_text.empty()) {
        if (!data_opts.data_path.empty() || !data_opts.counts_path.empty()) {
          throw FieldError("--theta", "give either --theta or a dataset, not both");
        }
        theta_hat = parse_theta("--theta", theta_text);
        if (n < 1) throw FieldError("--n", "a positive sample size is required with --theta");
      } else {
        const LoadedData data = load_data(data_opts, grid);
        warn_all(err, data.warnings);
        const FitConfig config = initial_value(make_fit_config(fit_opts), fit_opts, grid, data.counts, beta);
        const FitResult f = fit(grid, data.counts, beta, config);
        if (!f.converged) err << "warning: fit did not converge\n";
        theta_hat = f.theta_hat;
        n = data.counts.n();
        if (n < 1) throw FieldError("--data", "dataset is empty");
      }
      Output output(common.out_dir, out);
      const WaldReport report = wald_test(theta_hat, grid, beta, n, alpha, a0);
      output.table("wald.csv", [&](std::ostream& o) { write_wald_csv(o, theta_hat, beta.value(), n, report); });
      Manifest m = base_manifest("test", args, common);
      m.set("beta", format_list(betas));
      m.set("alpha", format_list({alpha}));
      m.set("contrast", contrast_text);
      m.set("n", std::to_string(n));
      m.set("theta", format_theta(theta_hat));
      record_fit(m, fit_opts);
      output.file("test_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }

    if (power->parsed()) {
      PowerStudyConfig config;
      config.grid = parse_grid(common.grid);
      config.betas = parse_betas(default_if_empty("0.2,0.4,0.6,0.8,1.0"));
      config.alpha = parse_alpha(alpha);
      config.contrast = parse_contrast(contrast_text);
      if (power_n < 1) throw FieldError("--n", "must be at least 1");
      if (power_sims < 0) throw FieldError("--simulate", "must be non-negative");
      config.n = power_n;
      config.simulation_replications = power_sims;
      config.seed = common.seed;
      config.fit = make_fit_config(fit_opts);
      if (theta_list.empty()) {
        config.thetas = reference_power_thetas();
      } else {
        for (const auto& t : theta_list) config.thetas.push_back(parse_theta("--theta", t));
      }
      Output output(common.out_dir, out);
      const PowerTable table = checked("--theta", [&] { return run_power_study(config); });
      output.table("power.csv", [&](std::ostream& o) { write_power_csv(o, table); });
      Manifest m = base_manifest("power", args, common);
      std::string thetas;
      for (const auto& t : config.thetas) thetas += (thetas.empty() ? "" : ";") + format_theta(t);
      m.set("thetas", thetas);
      m.set("n", std::to_string(config.n));
      m.set("betas", format_list(config.betas));
      m.set("alpha", format_list({alpha}));
      m.set("contrast", contrast_text);
      m.set("simulate", std::to_string(power_sims));
      record_fit(m, fit_opts);
      output.file("power_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }

    if (gof->parsed()) {
      if (bootstrap == 0 && gof->count("--bootstrap") == 0) bootstrap = 10000;
      if (bootstrap < 1) throw FieldError("--bootstrap", "must be at least 1");
      const InspectionGrid grid = parse_grid(common.grid);
      const auto betas = parse_betas(default_if_empty("0,0.2,0.4,0.6,0.8,1.0"));
      const FitConfig base = make_fit_config(fit_opts);
      const LoadedData data = load_data(data_opts, grid);
      warn_all(err, data.warnings);
      if (data.counts.n() < 1) throw FieldError("--data", "dataset is empty");
      Output output(common.out_dir, out);
      std::vector<std::pair<double, GofReport>> reports;
      for (std::size_t b = 0; b < betas.size(); ++b) {
        const TuningBeta beta(betas[b]);
        const FitConfig config = initial_value(base, fit_opts, grid, data.counts, beta);
        auto report = gof_bootstrap_pvalue(data.counts, grid, beta, bootstrap, derive_seed(common.seed, {b}), config);
        if (report.warning) err << "warning: " << to_string(beta) << ": " << *report.warning << '\n';
        reports.emplace_back(betas[b], std::move(report));
      }
      output.table("gof.csv", [&](std::ostream& o) { write_gof_csv(o, reports); });
      output.file("gof_expected.csv", [&](std::ostream& o) { write_expected_csv(o, grid, data.counts, reports); });
      Manifest m = base_manifest("gof", args, common);
      m.set("data", data_opts.data_path.empty() ? data_opts.counts_path : data_opts.data_path);
      m.set("divisor", format_list({data_opts.divisor}));
      m.set("n", std::to_string(data.counts.n()));
      m.set("betas", format_list(betas));
      m.set("bootstrap", std::to_string(bootstrap));
      record_fit(m, fit_opts);
      output.file("gof_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }

    if (design->parsed()) {
      const Theta theta = parse_theta("--theta", design_theta);
      const auto betas = parse_betas(default_if_empty("0.5"));
      if (betas.size() != 1) throw FieldError("--beta", "design takes a single tuning value");
      const auto costs = checked("--costs", [&] { return parse_double_list(costs_text); });
      if (costs.size() != 3) throw FieldError("--costs", "expected C0,Cn,Cf");
      const auto caps = checked("--caps", [&] { return parse_double_list(caps_text); });
      if (caps.size() != 3) throw FieldError("--caps", "expected C1,C2,tau-star");
      const auto bounds = checked("--bounds", [&] { return parse_double_list(bounds_text); });
      if (bounds.size() != 2) throw FieldError("--bounds", "expected lower,upper");
      CostModel cost{costs[0], costs[1], costs[2], design_n, caps[0], caps[1], caps[2]};
      checked("--costs", [&] {
        cost.validate();
        return 0;
      });
      GaConfig ga;
      ga.population_size = pop_size;
      ga.generations = generations;
      ga.dimension = dimension;
      ga.crossover_prob = pc;
      ga.crossover_index = eta_c;
      if (design->count("--pm") > 0) ga.mutation_prob = pm;
      ga.mutation_index = eta_m;
      ga.lower = bounds[0];
      ga.upper = bounds[1];
      ga.seed = common.seed;
      checked("--pop-size", [&] {
        ga.validate();
        return 0;
      });
      Output output(common.out_dir, out);
      const Nsga2Result result = nsga2_run(theta, TuningBeta(betas.front()), cost, ga);
      output.table("pareto.csv", [&](std::ostream& o) { write_pareto_csv(o, result.population); });
      output.file("design_history.csv", [&](std::ostream& o) { write_history_csv(o, result.history); });
      err << "rank-1 front: " << result.front.size() << " individuals (" << result.unique_front_size
          << " distinct); initial front " << result.history.front().front_size << '\n';
      Manifest m = base_manifest("design", args, common);
      m.set("theta", format_theta(theta));
      m.set("beta", format_list(betas));
      m.set("costs", format_list(costs));
      m.set("caps", format_list(caps));
      m.set("n", std::to_string(design_n));
      m.set("pop_size", std::to_string(pop_size));
      m.set("generations", std::to_string(generations));
      m.set("dimension", std::to_string(dimension));
      m.set("bounds", format_list(bounds));
      m.set("pc", format_list({pc}));
      m.set("eta_c", format_list({eta_c}));
      m.set("pm", format_list({ga.effective_mutation_prob()}));
      m.set("eta_m", format_list({eta_m}));
      output.file("design_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }

    if (simulate->parsed()) {
      const InspectionGrid grid = parse_grid(common.grid);
      const auto betas = parse_betas(default_if_empty("0,0.2,0.4,0.6,0.8,1.0"));
      const auto picks = checked("--scenario", [&] { return parse_double_list(scenarios_text); });
      if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw FieldError("--epsilon", "must lie in [0, 1]");
      if (reps < 1) throw FieldError("--reps", "must be at least 1");
      if (sim_n < 1) throw FieldError("--n", "must be at least 1");
      const FitConfig fit_config = make_fit_config(fit_opts);
      const auto scenarios = reference_scenarios();
      for (double s : picks) {
        if (s != 1.0 && s != 2.0 && s != 3.0) throw FieldError("--scenario", "scenarios are 1, 2 and 3");
      }
      Output output(common.out_dir, out);
      std::ostringstream bias_csv;
      bool header = true;
      for (double s : picks) {
        ScenarioConfig config = scenarios[static_cast<std::size_t>(s) - 1];
        config.contamination_fraction = epsilon;
        config.n = sim_n;
        config.grid = grid;
        config.replications = reps;
        config.betas = betas;
        config.seed = derive_seed(common.seed, {static_cast<std::uint64_t>(s)});
        config.fit = fit_config;
        const BiasReport report = run_bias_study(config);
        write_bias_csv(bias_csv, "theta" + std::to_string(static_cast<int>(s)), report, header);
        header = false;
      }
      output.table("bias.csv", [&](std::ostream& o) { o << bias_csv.str(); });
      if (with_power) {
        PowerStudyConfig pc_config;
        pc_config.thetas = reference_power_thetas();
        pc_config.grid = grid;
        pc_config.n = sim_n;
        pc_config.alpha = parse_alpha(alpha);
        std::vector<double> positive;
        for (double b : betas) {
          if (b > 0.0) positive.push_back(b);
        }
        pc_config.betas = positive.empty() ? std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0} : positive;
        const PowerTable table = run_power_study(pc_config);
        output.file("power.csv", [&](std::ostream& o) { write_power_csv(o, table); });
      }
      Manifest m = base_manifest("simulate", args, common);
      m.set("scenarios", scenarios_text);
      m.set("epsilon", format_list({epsilon}));
      m.set("reps", std::to_string(reps));
      m.set("n", std::to_string(sim_n));
      m.set("betas", format_list(betas));
      m.set("power", with_power ? "true" : "false");
      record_fit(m, fit_opts);
      output.file("simulate_manifest.txt", [&](std::ostream& o) { m.write(o); });
      return 0;
    }
  } catch (const FieldError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mocrisk::cli
