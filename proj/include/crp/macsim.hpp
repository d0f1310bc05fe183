#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "crp/crp.hpp"
#include "crp/errors.hpp"
#include "crp/rng.hpp"
#include "crp/tree.hpp"

namespace crp {

// 802.11b timing constants. Durations in microseconds, rate in Mbit/s
// (one bit per microsecond per Mbit/s).
struct PhyTimings {
  double sifs_us = 10.0;
  double difs_us = 50.0;
  double slot_us = 20.0;
  int payload_bytes = 1500;
  double phy_header_us = 96.0;
  int mac_overhead_data_bytes = 19;
  int mac_overhead_ack_bytes = 14;
  double rate_mbps = 11.0;

  void validate() const {
    if (!(sifs_us > 0 && difs_us > 0 && slot_us > 0 && payload_bytes > 0 &&
          phy_header_us > 0 && mac_overhead_data_bytes > 0 &&
          mac_overhead_ack_bytes > 0 && rate_mbps > 0)) {
      throw InvalidArgument("all timing constants must be strictly positive");
    }
  }

  friend bool operator==(const PhyTimings&, const PhyTimings&) = default;
};

// Header plus MAC framing (and payload, for data) at the channel rate.
inline double packet_airtime(const PhyTimings& t, bool is_ack) {
  const int bytes = is_ack ? t.mac_overhead_ack_bytes
                           : t.payload_bytes + t.mac_overhead_data_bytes;
  return t.phy_header_us + 8.0 * bytes / t.rate_mbps;
}

enum class ProtocolKind { beb_80211b, idle_sense, additive_cw, conti, tree_crp };

inline std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::beb_80211b:
      return "beb_80211b";
    case ProtocolKind::idle_sense:
      return "idle_sense";
    case ProtocolKind::additive_cw:
      return "additive_cw";
    case ProtocolKind::conti:
      return "conti";
    case ProtocolKind::tree_crp:
      return "tree_crp";
  }
  return "?";
}

inline ProtocolKind parse_protocol_kind(std::string_view name) {
  for (auto kind : {ProtocolKind::beb_80211b, ProtocolKind::idle_sense,
                    ProtocolKind::additive_cw, ProtocolKind::conti,
                    ProtocolKind::tree_crp}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown protocol '" + std::string(name) + "'");
}

struct BebParams {
  int cw_min = 32;
  int cw_max = 1024;
};

struct IdleSenseParams {
  double target_idle = 5.68;
  int window = 5;
  double growth = 1.2;
  double shrink = 1e-3;  // CW <- 2 CW / (2 + shrink * CW)
  double cw_min = 32.0;
  double cw_max = 1024.0;
};

struct AdditiveParams {
  int step = 32;
  double coin = 0.1809;
  int cw_min = 32;
  int cw_max = 1024;
};

struct CrpParams {
  ProbabilityTree tree;
};

struct ProtocolConfig {
  ProtocolKind kind;
  std::variant<BebParams, IdleSenseParams, AdditiveParams, CrpParams> params;

  static ProtocolConfig beb(BebParams p = {}) {
    return {ProtocolKind::beb_80211b, p};
  }
  static ProtocolConfig idle_sense(IdleSenseParams p = {}) {
    return {ProtocolKind::idle_sense, p};
  }
  static ProtocolConfig additive(AdditiveParams p = {}) {
    return {ProtocolKind::additive_cw, p};
  }
  static ProtocolConfig conti() {
    return {ProtocolKind::conti, CrpParams{conti_tree()}};
  }
  static ProtocolConfig tree_crp(ProbabilityTree tree) {
    return {ProtocolKind::tree_crp, CrpParams{std::move(tree)}};
  }

  bool uses_tree() const noexcept {
    return kind == ProtocolKind::conti || kind == ProtocolKind::tree_crp;
  }

  void validate() const {
    if (uses_tree() != std::holds_alternative<CrpParams>(params)) {
      throw InvalidArgument("a probability tree is required exactly for CRP protocols");
    }
    switch (kind) {
      case ProtocolKind::beb_80211b: {
        const auto* p = std::get_if<BebParams>(&params);
        if (!p || p->cw_min < 1 || p->cw_max < p->cw_min) {
          throw InvalidArgument("invalid 802.11b parameters");
        }
        break;
      }
      case ProtocolKind::idle_sense: {
        const auto* p = std::get_if<IdleSenseParams>(&params);
        if (!p || !(p->cw_min >= 1.0) || p->cw_max < p->cw_min || p->window < 1 ||
            !(p->growth > 1.0) || !(p->shrink > 0.0) || !(p->target_idle > 0.0)) {
          throw InvalidArgument("invalid Idle Sense parameters");
        }
        break;
      }
      case ProtocolKind::additive_cw: {
        const auto* p = std::get_if<AdditiveParams>(&params);
        if (!p || p->cw_min < 1 || p->cw_max < p->cw_min || p->step < 1 ||
            !(p->coin >= 0.0 && p->coin <= 1.0)) {
          throw InvalidArgument("invalid additive-CW parameters");
        }
        break;
      }
      case ProtocolKind::conti:
      case ProtocolKind::tree_crp:
        break;
    }
  }
};

inline int beb_update(int cw, bool success, const BebParams& p = {}) {
  return success ? p.cw_min : std::min(p.cw_max, 2 * cw);
}

inline double idle_sense_update(double cw, double avg_idle,
                                const IdleSenseParams& p = {}) {
  if (avg_idle < p.target_idle) return std::min(p.cw_max, cw * p.growth);
  return std::max(p.cw_min, 2.0 * cw / (2.0 + p.shrink * cw));
}

// `coin` is a uniform draw in [0, 1); it only matters on success.
inline int additive_update(int cw, bool success, double coin,
                           const AdditiveParams& p = {}) {
  if (!success) return std::min(p.cw_max, cw + p.step);
  if (coin < p.coin) return std::max(p.cw_min, cw - p.step);
  return cw;
}

// (sum x)^2 / (n sum x^2).
inline double jain_index(const std::vector<double>& x) {
  if (x.empty()) throw InvalidArgument("Jain index of an empty vector");
  double sum = 0.0;
  double sq = 0.0;
  for (double v : x) {
    if (!(v >= 0.0)) throw InvalidArgument("Jain index needs nonnegative values");
    sum += v;
    sq += v * v;
  }
  if (sq == 0.0) throw InvalidArgument("Jain index of an all-zero vector");
  return sum * sum / (static_cast<double>(x.size()) * sq);
}

inline double jain_index(const std::vector<std::uint64_t>& x) {
  return jain_index(std::vector<double>(x.begin(), x.end()));
}

struct SimResult {
  double throughput_mbps = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::vector<std::uint64_t> per_station;
  double jain = 0.0;
  double sim_time_us = 0.0;
  std::uint64_t seed = 0;

  double collision_rate() const noexcept {
    const auto periods = successes + collisions;
    return periods ? static_cast<double>(collisions) / static_cast<double>(periods)
                   : 0.0;
  }

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

namespace detail {

struct Ledger {
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::vector<std::uint64_t> per_station;
  double time_us = 0.0;
};

inline void simulate_crp(const ProbabilityTree& tree, std::size_t n,
                         std::uint64_t target, const PhyTimings& t, Rng& rng,
                         Ledger& ledger) {
  const double contention = t.difs_us + tree.depth() * t.slot_us;
  const double data = packet_airtime(t, false);
  const double ack_exchange = t.sifs_us + packet_airtime(t, true);
  CrpRunner runner(tree);
  while (ledger.successes < target) {
    const CrpOutcome out = runner.run(n, rng);
    ledger.time_us += contention + data;
    if (out.winner) {
      ledger.time_us += ack_exchange;
      ++ledger.successes;
      ++ledger.per_station[*out.winner];
    } else {
      ++ledger.collisions;
    }
  }
}

struct BackoffStation {
  double cw = 0.0;
  std::uint64_t counter = 0;
  double idle_sum = 0.0;
  int observations = 0;
};

// Counter draw in {0, ..., ceil(cw) - 1}.
inline std::uint64_t draw_counter(double cw, Rng& rng) {
  return rng.below(static_cast<std::uint64_t>(std::ceil(cw)));
}

inline void simulate_backoff(const ProtocolConfig& protocol, std::size_t n,
                             std::uint64_t target, const PhyTimings& t,
                             Rng& rng, Ledger& ledger) {
  const double data = packet_airtime(t, false);
  const double ack_exchange = t.sifs_us + packet_airtime(t, true);

  double initial_cw = 0.0;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (!std::is_same_v<P, CrpParams>) initial_cw = p.cw_min;
      },
      protocol.params);

  std::vector<BackoffStation> stations(n);
  for (auto& s : stations) {
    s.cw = initial_cw;
    s.counter = draw_counter(s.cw, rng);
  }
  std::vector<std::size_t> transmitters;
  transmitters.reserve(n);

  while (ledger.successes < target) {
    std::uint64_t idle = std::numeric_limits<std::uint64_t>::max();
    for (const auto& s : stations) idle = std::min(idle, s.counter);
    transmitters.clear();
    for (std::size_t i = 0; i < n; ++i) {
      stations[i].counter -= idle;
      if (stations[i].counter == 0) transmitters.push_back(i);
    }
    const bool success = transmitters.size() == 1;
    ledger.time_us += t.difs_us + static_cast<double>(idle) * t.slot_us + data;
    if (success) {
      ledger.time_us += ack_exchange;
      ++ledger.successes;
      ++ledger.per_station[transmitters.front()];
    } else {
      ++ledger.collisions;
    }

    switch (protocol.kind) {
      case ProtocolKind::beb_80211b: {
        const auto& p = std::get<BebParams>(protocol.params);
        for (std::size_t i : transmitters) {
          auto& s = stations[i];
          s.cw = beb_update(static_cast<int>(s.cw), success, p);
        }
        break;
      }
      case ProtocolKind::additive_cw: {
        const auto& p = std::get<AdditiveParams>(protocol.params);
        for (std::size_t i : transmitters) {
          auto& s = stations[i];
          const double coin = success ? rng.uniform() : 1.0;
          s.cw = additive_update(static_cast<int>(s.cw), success, coin, p);
        }
        break;
      }
      case ProtocolKind::idle_sense: {
        const auto& p = std::get<IdleSenseParams>(protocol.params);
        for (auto& s : stations) {
          s.idle_sum += static_cast<double>(idle);
          if (++s.observations == p.window) {
            s.cw = idle_sense_update(s.cw, s.idle_sum / s.observations, p);
            s.idle_sum = 0.0;
            s.observations = 0;
          }
        }
        break;
      }
      case ProtocolKind::conti:
      case ProtocolKind::tree_crp:
        throw InvalidArgument("CRP protocol routed to the backoff simulator");
    }
    for (std::size_t i : transmitters) {
      stations[i].counter = draw_counter(stations[i].cw, rng);
    }
  }
}

}  // namespace detail

// Saturated stations contend until `target_successes` data packets have been
// acknowledged.
inline SimResult simulate(const ProtocolConfig& protocol, std::size_t n,
                          std::uint64_t target_successes,
                          const PhyTimings& timings, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("simulation needs at least two stations");
  if (target_successes < 1) throw InvalidArgument("target_successes must be >= 1");
  protocol.validate();
  timings.validate();

  Rng rng(seed);
  detail::Ledger ledger;
  ledger.per_station.assign(n, 0);
  if (protocol.uses_tree()) {
    detail::simulate_crp(std::get<CrpParams>(protocol.params).tree, n,
                         target_successes, timings, rng, ledger);
  } else {
    detail::simulate_backoff(protocol, n, target_successes, timings, rng, ledger);
  }

  SimResult r;
  r.successes = ledger.successes;
  r.collisions = ledger.collisions;
  r.sim_time_us = ledger.time_us;
  r.throughput_mbps = static_cast<double>(r.successes) * timings.payload_bytes *
                      8.0 / r.sim_time_us;
  r.jain = jain_index(ledger.per_station);
  r.per_station = std::move(ledger.per_station);
  r.seed = seed;
  return r;
}

}  // namespace crp
