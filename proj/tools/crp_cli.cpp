// crp: tune contention-resolution probability trees, compare collision
// rates, and run the MAC throughput/fairness simulations.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric
// degeneracy.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crp/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
  std::string config_path;
  std::optional<double> alpha;
  std::optional<int> n_max;
  std::optional<unsigned> k;
  std::optional<std::size_t> grid_size;
  std::optional<std::string> method;
  std::optional<std::string> out;
  std::vector<std::string> trees;
  std::vector<int> n_sweep;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> successes;
  std::optional<unsigned> k_min;
  std::optional<unsigned> k_max;
  std::optional<unsigned> jobs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "Experiment config (JSON)");
  cmd->add_option("--alpha", o.alpha, "Power-law exponent of the scenario");
  cmd->add_option("--n-max", o.n_max, "Largest station count of the scenario");
  cmd->add_option("-k,--rounds", o.k, "Number of signalling rounds");
  cmd->add_option("-M,--grid-size", o.grid_size, "Grid resolution M");
  cmd->add_option("--method", o.method, "quantile | dp | uniform");
  cmd->add_option("-o,--out", o.out, "Output directory (default $CRP_OUTPUT_DIR or .)");
  cmd->add_option("-j,--jobs", o.jobs, "Worker threads");
}

crp::ExperimentConfig resolve(const Overrides& o) {
  crp::ExperimentConfig c =
      o.config_path.empty() ? crp::ExperimentConfig{} : crp::load_config(o.config_path);
  if (o.alpha || o.n_max) {
    crp::json s = c.scenario.contains("weights") ? crp::json{{"alpha", 0.7}, {"n_max", 100}}
                                                 : c.scenario;
    if (o.alpha) s["alpha"] = *o.alpha;
    if (o.n_max) s["n_max"] = *o.n_max;
    c.scenario = s;
  }
  if (o.k) c.k = *o.k;
  if (o.grid_size) c.grid_size = *o.grid_size;
  if (o.method) c.method = crp::parse_tuning_method(*o.method);
  if (o.out) c.output_dir = *o.out;
  if (!o.trees.empty()) c.trees = o.trees;
  if (!o.n_sweep.empty()) c.n_sweep = o.n_sweep;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.trials) c.mc_trials = *o.trials;
  if (o.successes) c.target_successes = *o.successes;
  if (o.k_min) c.k_min = *o.k_min;
  if (o.k_max) c.k_max = *o.k_max;
  if (o.jobs) c.jobs = *o.jobs;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contention-resolution tuning and MAC simulation"};
  app.require_subcommand(1);
  Overrides o;

  auto* tune = app.add_subcommand("tune", "Tune the emission-probability tree");
  add_common(tune, o);

  auto* rates = app.add_subcommand("rates", "Analytic and Monte Carlo collision rates per n");
  add_common(rates, o);
  rates->add_option("--tree", o.trees, "tuned | conti | path to tree JSON (repeatable)");
  rates->add_option("-n,--n", o.n_sweep, "Station counts");
  rates->add_option("--seed", o.seeds, "Seed");
  rates->add_option("--trials", o.trials, "Monte Carlo trials per n");

  auto* simulate = app.add_subcommand("simulate", "Saturated MAC simulation");
  add_common(simulate, o);
  simulate->add_option("-n,--n", o.n_sweep, "Station counts");
  simulate->add_option("--seed", o.seeds, "Seeds");
  simulate->add_option("--successes", o.successes, "Successful transmissions per run");

  auto* bounds = app.add_subcommand("bounds", "Collision rate versus asymptotic and lower bounds");
  add_common(bounds, o);
  bounds->add_option("--k-min", o.k_min, "Smallest k");
  bounds->add_option("--k-max", o.k_max, "Largest k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const crp::ExperimentConfig c = resolve(o);
    if (tune->parsed()) {
      const auto r = crp::cmd_tune(c, std::cout);
      std::cout << "wrote " << r.file.string() << '\n';
    } else if (rates->parsed()) {
      crp::cmd_rates(c, std::cout);
    } else if (simulate->parsed()) {
      const auto r = crp::cmd_simulate(c, std::cout);
      std::cout << "wrote " << r.csv.string() << ", " << r.means_csv.string() << ", "
                << r.summary.string() << '\n';
    } else if (bounds->parsed()) {
      const auto r = crp::cmd_bounds(c, std::cout);
      std::cout << "wrote " << r.file.string() << '\n';
    }
  } catch (const crp::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const crp::PreconditionViolated& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const crp::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
