#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "crp/distributions.hpp"
#include "crp/errors.hpp"
#include "crp/macsim.hpp"
#include "crp/optimizer.hpp"
#include "crp/tree.hpp"

namespace crp {

using json = nlohmann::json;

// {"alpha": ..., "n_max": ..., "weights": {"2": q_2, ...}}; alpha is omitted
// for explicit weight tables.
inline json to_json(const StationDistribution& dist) {
  json weights = json::object();
  for (const auto& [n, q] : dist.weights()) weights[std::to_string(n)] = q;
  json out;
  if (dist.alpha()) out["alpha"] = *dist.alpha();
  out["n_max"] = dist.n_max();
  out["weights"] = std::move(weights);
  return out;
}

inline StationDistribution distribution_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("distribution must be a JSON object");
  if (j.contains("weights")) {
    std::map<int, double> weights;
    for (const auto& [key, value] : j.at("weights").items()) {
      std::size_t used = 0;
      int n = 0;
      try {
        n = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || key.empty()) {
        throw InvalidArgument("weight key '" + key + "' is not an integer");
      }
      weights[n] = value.get<double>();
    }
    std::optional<double> alpha;
    std::optional<int> n_max;
    if (j.contains("alpha") && !j.at("alpha").is_null()) alpha = j.at("alpha").get<double>();
    if (j.contains("n_max") && !j.at("n_max").is_null()) n_max = j.at("n_max").get<int>();
    return StationDistribution(std::move(weights), alpha, n_max);
  }
  if (j.contains("alpha") && j.contains("n_max")) {
    return make_power_law(j.at("alpha").get<double>(), j.at("n_max").get<int>());
  }
  throw InvalidArgument("distribution needs either 'weights' or 'alpha' and 'n_max'");
}

// {"k": 6, "p": {"": p_root, "0": ..., "1": ..., ...}}
inline json to_json(const ProbabilityTree& tree) {
  json p = json::object();
  for (unsigned l = 0; l < tree.depth(); ++l) {
    for (const Word& w : words_of_length(l)) p[w.to_string()] = tree.p(w);
  }
  return json{{"k", tree.depth()}, {"p", std::move(p)}};
}

inline ProbabilityTree tree_from_json(const json& j) {
  if (!j.is_object() || !j.contains("k") || !j.contains("p")) {
    throw InvalidArgument("tree JSON needs 'k' and 'p'");
  }
  const auto k = j.at("k").get<unsigned>();
  const json& p = j.at("p");
  if (k < 1 || k > ProbabilityTree::kMaxDepth) throw InvalidArgument("tree depth out of range");
  if (!p.is_object() || p.size() != (std::size_t{1} << k) - 1) {
    throw InvalidArgument("tree JSON must list exactly 2^k - 1 probabilities");
  }
  return ProbabilityTree::from_function(k, [&](const Word& w) {
    const auto key = w.to_string();
    if (!p.contains(key)) throw InvalidArgument("tree JSON is missing word '" + key + "'");
    return p.at(key).get<double>();
  });
}

inline json to_json(const Partition& z) { return json{{"z", z.points()}}; }

inline Partition partition_from_json(const json& j) {
  if (!j.is_object() || !j.contains("z")) throw InvalidArgument("partition JSON needs 'z'");
  return Partition(j.at("z").get<std::vector<double>>());
}

inline json to_json(const TuningReport& r) {
  json out{{"method", to_string(r.method)},
           {"k", r.k},
           {"grid_size", r.grid_size},
           {"rho", r.rho},
           {"collision", 1.0 - r.rho},
           {"asymptotic_collision", r.asymptotic_bound},
           {"tree", to_json(r.tree)},
           {"partition", to_json(r.partition)}};
  out["lower_bound"] = r.lower_bound ? json(*r.lower_bound) : json(nullptr);
  if (r.correction) {
    out["correction_constants"] = {
        {"f3_at_1", r.correction->third_derivative_at_one},
        {"f2_at_1", r.correction->second_derivative_at_one},
        {"f3_at_0", r.correction->third_derivative_at_zero}};
  } else {
    out["correction_constants"] = nullptr;
  }
  return out;
}

inline json to_json(const PhyTimings& t) {
  return json{{"sifs_us", t.sifs_us},
              {"difs_us", t.difs_us},
              {"slot_us", t.slot_us},
              {"payload_bytes", t.payload_bytes},
              {"phy_header_us", t.phy_header_us},
              {"mac_overhead_data_bytes", t.mac_overhead_data_bytes},
              {"mac_overhead_ack_bytes", t.mac_overhead_ack_bytes},
              {"rate_mbps", t.rate_mbps}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline PhyTimings timings_from_json(const json& j, PhyTimings t = {}) {
  if (!j.is_object()) throw InvalidArgument("timings must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "sifs_us") t.sifs_us = value.get<double>();
    else if (key == "difs_us") t.difs_us = value.get<double>();
    else if (key == "slot_us") t.slot_us = value.get<double>();
    else if (key == "payload_bytes") t.payload_bytes = value.get<int>();
    else if (key == "phy_header_us") t.phy_header_us = value.get<double>();
    else if (key == "mac_overhead_data_bytes") t.mac_overhead_data_bytes = value.get<int>();
    else if (key == "mac_overhead_ack_bytes") t.mac_overhead_ack_bytes = value.get<int>();
    else if (key == "rate_mbps") t.rate_mbps = value.get<double>();
    else throw InvalidArgument("unknown timing key '" + key + "'");
  }
  t.validate();
  return t;
}

inline json to_json(const SimResult& r) {
  return json{{"throughput_mbps", r.throughput_mbps},
              {"successes", r.successes},
              {"collisions", r.collisions},
              {"collision_rate", r.collision_rate()},
              {"jain", r.jain},
              {"sim_time_us", r.sim_time_us},
              {"seed", r.seed},
              {"per_station", r.per_station}};
}

}  // namespace crp
