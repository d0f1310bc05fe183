#pragma once

// Experiment driver behind the command-line tool: configuration, the four
// commands (tune, rates, simulate, bounds) and their output files.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "crp/crp.hpp"
#include "crp/distributions.hpp"
#include "crp/errors.hpp"
#include "crp/json_io.hpp"
#include "crp/macsim.hpp"
#include "crp/optimizer.hpp"
#include "crp/rng.hpp"
#include "crp/tree.hpp"

namespace crp {

// Configuration/input failure (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr const char* kOutputDirEnv = "CRP_OUTPUT_DIR";

struct ExperimentConfig {
  // Scenario: a power law or an explicit weight table.
  json scenario = json{{"alpha", 0.7}, {"n_max", 100}};
  unsigned k = 6;
  std::size_t grid_size = kDefaultGridSize;
  TuningMethod method = TuningMethod::quantile;
  // For `rates`: "tuned", "conti", or a path to a tree JSON file.
  std::vector<std::string> trees = {"tuned", "conti"};
  // For `simulate`: objects {"kind": ..., params...}.
  json protocols = json::array({json{{"kind", "beb_80211b"}}, json{{"kind", "idle_sense"}},
                                json{{"kind", "additive_cw"}}, json{{"kind", "conti"}},
                                json{{"kind", "tree_crp"}}});
  std::optional<std::vector<int>> n_sweep;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::uint64_t target_successes = 10000;
  std::uint64_t mc_trials = 100000;
  PhyTimings timings;
  unsigned k_min = 1;
  unsigned k_max = 10;
  std::string output_dir;
  unsigned jobs = 0;  // 0: hardware concurrency

  std::vector<int> rates_sweep() const {
    if (n_sweep) return *n_sweep;
    std::vector<int> out;
    for (int n = 2; n <= 100; ++n) out.push_back(n);
    return out;
  }

  std::vector<int> simulate_sweep() const {
    return n_sweep.value_or(std::vector<int>{5, 10, 20, 50, 100});
  }

  std::filesystem::path output_path() const {
    if (!output_dir.empty()) return output_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return ".";
  }

  unsigned worker_count() const {
    if (jobs > 0) return jobs;
    return std::max(1U, std::thread::hardware_concurrency());
  }
};

inline json to_json(const ExperimentConfig& c) {
  json out{{"scenario", c.scenario},
           {"k", c.k},
           {"grid_size", c.grid_size},
           {"method", to_string(c.method)},
           {"trees", c.trees},
           {"protocols", c.protocols},
           {"seeds", c.seeds},
           {"target_successes", c.target_successes},
           {"mc_trials", c.mc_trials},
           {"timings", to_json(c.timings)},
           {"k_range", {c.k_min, c.k_max}},
           {"output_dir", c.output_path().string()}};
  out["n_sweep"] = c.n_sweep ? json(*c.n_sweep) : json(nullptr);
  return out;
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "scenario") c.scenario = value;
      else if (key == "k") c.k = value.get<unsigned>();
      else if (key == "grid_size") c.grid_size = value.get<std::size_t>();
      else if (key == "method") c.method = parse_tuning_method(value.get<std::string>());
      else if (key == "trees") c.trees = value.get<std::vector<std::string>>();
      else if (key == "protocols") c.protocols = value;
      else if (key == "n_sweep") {
        if (!value.is_null()) c.n_sweep = value.get<std::vector<int>>();
      } else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "target_successes") c.target_successes = value.get<std::uint64_t>();
      else if (key == "mc_trials") c.mc_trials = value.get<std::uint64_t>();
      else if (key == "timings") c.timings = timings_from_json(value);
      else if (key == "k_range") {
        const auto range = value.get<std::vector<unsigned>>();
        if (range.size() != 2) throw ConfigError("k_range must be [k_min, k_max]");
        c.k_min = range[0];
        c.k_max = range[1];
      } else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "jobs") c.jobs = value.get<unsigned>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

namespace detail {

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  ensure_dir(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

// Runs body(i) for i in [0, count) on `workers` threads. Callers write into
// slot i only, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::string csv_config_line(const ExperimentConfig& c) {
  return "# config: " + to_json(c).dump();
}

}  // namespace detail

inline Polynomial scenario_gf(const ExperimentConfig& c) {
  return gf_from_distribution(distribution_from_json(c.scenario));
}

// Table-2 style listing ordered by (l(w), #(w)).
inline void print_tree_listing(const ProbabilityTree& tree, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(6);
  for (unsigned l = 0; l < tree.depth(); ++l) {
    for (const Word& w : words_of_length(l)) {
      out << "p_" << std::left << std::setw(static_cast<int>(tree.depth()) + 1)
          << (w.length() ? w.to_string() : std::string("{}")) << ' ' << tree.p(w)
          << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

struct TuneOutput {
  TuningReport report;
  std::filesystem::path file;
};

inline TuneOutput cmd_tune(const ExperimentConfig& c, std::ostream& log) {
  const StationDistribution dist = distribution_from_json(c.scenario);
  const Polynomial f = gf_from_distribution(dist);
  TuningReport report = tune(f, c.k, c.method, c.grid_size);

  json out = to_json(report);
  out["scenario"] = to_json(dist);
  out["config"] = to_json(c);
  const auto file = c.output_path() / "tune.json";
  detail::write_json(file, out);

  log << "method " << to_string(report.method) << ", k = " << report.k
      << ", M = " << report.grid_size << '\n';
  print_tree_listing(report.tree, log);
  log << std::setprecision(6) << "collision rate " << 1.0 - report.rho
      << ", asymptotic " << report.asymptotic_bound << '\n';
  return {std::move(report), file};
}

// A bare tree document, or a tune.json report holding one under "tree".
inline ProbabilityTree load_tree_file(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  return tree_from_json(j.is_object() && j.contains("tree") ? j.at("tree") : j);
}

struct NamedTree {
  std::string name;
  ProbabilityTree tree;
};

inline ProbabilityTree tuned_tree(const ExperimentConfig& c) {
  return tune(scenario_gf(c), c.k, c.method, c.grid_size).tree;
}

inline NamedTree resolve_tree(const ExperimentConfig& c, const std::string& spec) {
  if (spec == "tuned") return {"tuned", tuned_tree(c)};
  if (spec == "conti") return {"conti", conti_tree()};
  const std::filesystem::path path(spec);
  return {path.stem().string(), load_tree_file(path)};
}

struct RateRow {
  int n;
  double analytic;
  double mc;
  double mc_stderr;
};

struct RatesOutput {
  std::string tree;
  std::vector<RateRow> rows;
  std::filesystem::path file;
};

// Per-n analytic and Monte Carlo collision rates. The Monte Carlo stream for
// (tree index, n, seed) is fixed, so output is independent of worker count.
inline std::vector<RatesOutput> cmd_rates(const ExperimentConfig& c, std::ostream& log) {
  const auto sweep = c.rates_sweep();
  if (sweep.empty()) throw ConfigError("n_sweep is empty");
  for (int n : sweep) {
    if (n < 1) throw ConfigError("rates need n >= 1");
  }
  if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (c.trees.empty()) throw ConfigError("no trees requested");

  std::vector<RatesOutput> outputs;
  for (std::size_t t = 0; t < c.trees.size(); ++t) {
    const NamedTree named = resolve_tree(c, c.trees[t]);
    const Partition z = tree_to_partition(named.tree);
    std::vector<RateRow> rows(sweep.size());
    detail::parallel_for(sweep.size(), c.worker_count(), [&](std::size_t i) {
      const int n = sweep[i];
      Rng rng = Rng(c.seeds.front(), t).split(static_cast<std::uint64_t>(n));
      const CollisionEstimate mc =
          monte_carlo_collision(named.tree, static_cast<std::size_t>(n), c.mc_trials, rng);
      rows[i] = {n, collision_rate_fixed_n(z, static_cast<std::size_t>(n)), mc.rate,
                 mc.standard_error};
    });

    const auto file = c.output_path() / ("rates_" + named.name + ".csv");
    auto out = detail::open_output(file);
    out << detail::csv_config_line(c) << '\n';
    out << "n,analytic_collision,mc_collision,mc_stderr\n";
    for (const auto& r : rows) {
      out << r.n << ',' << r.analytic << ',' << r.mc << ',' << r.mc_stderr << '\n';
    }
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& r : rows) {
      if (r.n < 2) continue;
      lo = std::min(lo, r.analytic);
      hi = std::max(hi, r.analytic);
    }
    log << named.name << ": analytic collision rate in [" << lo << ", " << hi
        << "] over " << rows.size() << " values of n -> " << file.string() << '\n';
    outputs.push_back({named.name, std::move(rows), file});
  }
  return outputs;
}

inline ProtocolConfig protocol_from_json(const json& j, const ExperimentConfig& c) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("protocol needs a 'kind'");
  const ProtocolKind kind = parse_protocol_kind(j.at("kind").get<std::string>());
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") continue;
      if (std::none_of(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; })) {
        throw ConfigError("unknown parameter '" + key + "' for protocol " +
                          std::string(to_string(kind)));
      }
    }
  };
  ProtocolConfig p = [&] {
    switch (kind) {
      case ProtocolKind::beb_80211b: {
        reject_unknown({"cw_min", "cw_max"});
        BebParams b;
        b.cw_min = j.value("cw_min", b.cw_min);
        b.cw_max = j.value("cw_max", b.cw_max);
        return ProtocolConfig::beb(b);
      }
      case ProtocolKind::idle_sense: {
        reject_unknown({"target_idle", "window", "growth", "shrink", "cw_min", "cw_max"});
        IdleSenseParams s;
        s.target_idle = j.value("target_idle", s.target_idle);
        s.window = j.value("window", s.window);
        s.growth = j.value("growth", s.growth);
        s.shrink = j.value("shrink", s.shrink);
        s.cw_min = j.value("cw_min", s.cw_min);
        s.cw_max = j.value("cw_max", s.cw_max);
        return ProtocolConfig::idle_sense(s);
      }
      case ProtocolKind::additive_cw: {
        reject_unknown({"step", "coin", "cw_min", "cw_max"});
        AdditiveParams a;
        a.step = j.value("step", a.step);
        a.coin = j.value("coin", a.coin);
        a.cw_min = j.value("cw_min", a.cw_min);
        a.cw_max = j.value("cw_max", a.cw_max);
        return ProtocolConfig::additive(a);
      }
      case ProtocolKind::conti:
        reject_unknown({"tree_file"});
        if (j.contains("tree_file")) {
          return ProtocolConfig{ProtocolKind::conti,
                                CrpParams{load_tree_file(j.at("tree_file").get<std::string>())}};
        }
        return ProtocolConfig::conti();
      case ProtocolKind::tree_crp:
        reject_unknown({"tree_file"});
        if (j.contains("tree_file")) {
          return ProtocolConfig::tree_crp(
              load_tree_file(j.at("tree_file").get<std::string>()));
        }
        return ProtocolConfig::tree_crp(tuned_tree(c));
    }
    throw ConfigError("unreachable protocol kind");
  }();
  p.validate();
  return p;
}

struct SimulateCell {
  std::string protocol;
  int n;
  std::vector<SimResult> runs;  // one per seed, in config order

  double mean(double (*field)(const SimResult&)) const {
    double s = 0.0;
    for (const auto& r : runs) s += field(r);
    return s / static_cast<double>(runs.size());
  }
  double mean_throughput() const {
    return mean([](const SimResult& r) { return r.throughput_mbps; });
  }
  double mean_collision_rate() const {
    return mean([](const SimResult& r) { return r.collision_rate(); });
  }
  double mean_jain() const {
    return mean([](const SimResult& r) { return r.jain; });
  }
};

struct SimulateOutput {
  std::vector<SimulateCell> cells;  // protocol-major, then n
  std::filesystem::path csv;
  std::filesystem::path means_csv;
  std::filesystem::path summary;
};

inline SimulateOutput cmd_simulate(const ExperimentConfig& c, std::ostream& log) {
  const auto sweep = c.simulate_sweep();
  if (sweep.empty()) throw ConfigError("n_sweep is empty");
  for (int n : sweep) {
    if (n < 2) throw ConfigError("simulation needs n >= 2");
  }
  if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (c.target_successes < 1) throw ConfigError("target_successes must be >= 1");
  if (!c.protocols.is_array() || c.protocols.empty()) {
    throw ConfigError("protocols must be a nonempty array");
  }

  std::vector<ProtocolConfig> protocols;
  for (const auto& pj : c.protocols) protocols.push_back(protocol_from_json(pj, c));

  const std::size_t per_protocol = sweep.size() * c.seeds.size();
  std::vector<SimResult> results(protocols.size() * per_protocol);
  detail::parallel_for(results.size(), c.worker_count(), [&](std::size_t i) {
    const std::size_t p = i / per_protocol;
    const std::size_t rest = i % per_protocol;
    const int n = sweep[rest / c.seeds.size()];
    const std::uint64_t seed = c.seeds[rest % c.seeds.size()];
    results[i] = simulate(protocols[p], static_cast<std::size_t>(n), c.target_successes,
                          c.timings, seed);
  });

  SimulateOutput output;
  for (std::size_t p = 0; p < protocols.size(); ++p) {
    for (std::size_t ni = 0; ni < sweep.size(); ++ni) {
      SimulateCell cell{std::string(to_string(protocols[p].kind)), sweep[ni], {}};
      for (std::size_t s = 0; s < c.seeds.size(); ++s) {
        cell.runs.push_back(results[p * per_protocol + ni * c.seeds.size() + s]);
      }
      output.cells.push_back(std::move(cell));
    }
  }

  const auto dir = c.output_path();
  output.csv = dir / "simulate.csv";
  output.means_csv = dir / "simulate_means.csv";
  output.summary = dir / "simulate_summary.json";
  {
    auto out = detail::open_output(output.csv);
    out << detail::csv_config_line(c) << '\n';
    out << "protocol,n,seed,throughput_mbps,collision_rate,jain\n";
    for (const auto& cell : output.cells) {
      for (const auto& r : cell.runs) {
        out << cell.protocol << ',' << cell.n << ',' << r.seed << ',' << r.throughput_mbps
            << ',' << r.collision_rate() << ',' << r.jain << '\n';
      }
    }
  }
  {
    auto out = detail::open_output(output.means_csv);
    out << detail::csv_config_line(c) << '\n';
    out << "protocol,n,runs,throughput_mbps,collision_rate,jain\n";
    for (const auto& cell : output.cells) {
      out << cell.protocol << ',' << cell.n << ',' << cell.runs.size() << ','
          << cell.mean_throughput() << ',' << cell.mean_collision_rate() << ','
          << cell.mean_jain() << '\n';
    }
  }
  json cells = json::array();
  for (const auto& cell : output.cells) {
    json runs = json::array();
    for (const auto& r : cell.runs) runs.push_back(to_json(r));
    cells.push_back({{"protocol", cell.protocol},
                     {"n", cell.n},
                     {"mean_throughput_mbps", cell.mean_throughput()},
                     {"mean_collision_rate", cell.mean_collision_rate()},
                     {"mean_jain", cell.mean_jain()},
                     {"runs", std::move(runs)}});
  }
  detail::write_json(output.summary, json{{"config", to_json(c)}, {"cells", std::move(cells)}});

  log << std::setprecision(4);
  for (const auto& cell : output.cells) {
    log << std::left << std::setw(12) << cell.protocol << " n=" << std::setw(4) << cell.n
        << " throughput " << cell.mean_throughput() << " Mbit/s, collisions "
        << cell.mean_collision_rate() << ", jain " << cell.mean_jain() << '\n';
  }
  return output;
}

struct BoundsRow {
  unsigned k;
  std::size_t m;
  std::optional<double> quantile_collision;  // absent when f'' vanishes
  double dp_collision;
  double asymptotic;
  std::optional<double> lower_bound;
};

struct BoundsOutput {
  std::vector<BoundsRow> rows;
  std::filesystem::path file;
};

inline BoundsOutput cmd_bounds(const ExperimentConfig& c, std::ostream& log) {
  if (c.k_min < 1 || c.k_max < c.k_min) throw ConfigError("k range is empty");
  if (c.k_max > 16) throw ConfigError("k_max above 16 is not supported");
  const Polynomial f = scenario_gf(c);
  const bool curved = f.derivative(2)(0.0) > 0.0;
  const bool has_density = !f.derivative(2).is_zero();

  std::vector<BoundsRow> rows(c.k_max - c.k_min + 1);
  detail::parallel_for(rows.size(), c.worker_count(), [&](std::size_t i) {
    const unsigned k = c.k_min + static_cast<unsigned>(i);
    const std::size_t m = std::size_t{1} << k;
    BoundsRow row{k, m, std::nullopt, 0.0, asymptotic_collision(f, k), std::nullopt};
    if (has_density) {
      row.quantile_collision = 1.0 - success_probability(f, quantile_partition(f, k, c.grid_size));
    }
    row.dp_collision = 1.0 - success_probability(f, dp_optimal_partition(f, m, c.grid_size));
    if (curved) row.lower_bound = lower_bound_collision(f, m);
    rows[i] = row;
  });

  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json jrows = json::array();
  for (const auto& r : rows) {
    json row{{"k", r.k},
             {"m", r.m},
             {"quantile_collision", opt(r.quantile_collision)},
             {"dp_collision", r.dp_collision},
             {"asymptotic", r.asymptotic},
             {"lower_bound", opt(r.lower_bound)},
             {"ratio_dp", r.dp_collision / r.asymptotic}};
    row["ratio_quantile"] =
        r.quantile_collision ? json(*r.quantile_collision / r.asymptotic) : json(nullptr);
    jrows.push_back(std::move(row));
  }
  BoundsOutput output{rows, c.output_path() / "bounds.json"};
  json doc{{"config", to_json(c)}, {"rows", std::move(jrows)}};
  if (curved) {
    const auto cc = correction_constants(f);
    doc["correction_constants"] = {{"f3_at_1", cc.third_derivative_at_one},
                                   {"f2_at_1", cc.second_derivative_at_one},
                                   {"f3_at_0", cc.third_derivative_at_zero}};
  }
  detail::write_json(output.file, doc);

  log << std::setprecision(6);
  for (const auto& r : rows) {
    log << "k=" << std::setw(2) << r.k << "  dp " << r.dp_collision << "  asymptotic "
        << r.asymptotic << "  ratio " << r.dp_collision / r.asymptotic << '\n';
  }
  return output;
}

}  // namespace crp
