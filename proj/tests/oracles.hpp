#pragma once

// Test-only reference computations. None of these call into the library
// routines they are used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "crp/tree.hpp"

namespace oracle {

// Reference emission probabilities (six significant digits) for alpha = 0.7, N = 100, k = 6, keyed by
// try-bit word (empty string for the root).
inline const std::map<std::string, double>& reference_tree_k6() {
  static const std::map<std::string, double> t = {
      {"", 0.0628357},     {"0", 0.166808},     {"1", 0.305488},
      {"00", 0.295586},    {"01", 0.328258},    {"10", 0.375175},
      {"11", 0.423688},    {"000", 0.388521},   {"001", 0.398651},
      {"010", 0.407585},   {"011", 0.416295},   {"100", 0.429211},
      {"101", 0.444548},   {"110", 0.457931},   {"111", 0.465291},
      {"0000", 0.442201},  {"0001", 0.444984},  {"0010", 0.447669},
      {"0011", 0.450083},  {"0100", 0.452293},  {"0101", 0.454545},
      {"0110", 0.456444},  {"0111", 0.459286},  {"1000", 0.462745},
      {"1001", 0.466754},  {"1010", 0.469799},  {"1011", 0.473795},
      {"1100", 0.475827},  {"1101", 0.478916},  {"1110", 0.484211},
      {"1111", 0.483871},  {"00000", 0.470679}, {"00001", 0.471427},
      {"00010", 0.472147}, {"00011", 0.472882}, {"00100", 0.473527},
      {"00101", 0.474214}, {"00110", 0.474668}, {"00111", 0.475313},
      {"01000", 0.476041}, {"01001", 0.476681}, {"01010", 0.477124},
      {"01011", 0.477647}, {"01100", 0.477976}, {"01101", 0.478795},
      {"01110", 0.478203}, {"01111", 0.48056},  {"10000", 0.479927},
      {"10001", 0.480932}, {"10010", 0.481663}, {"10011", 0.48324},
      {"10100", 0.484177}, {"10101", 0.485714}, {"10110", 0.486056},
      {"10111", 0.486726}, {"11000", 0.490291}, {"11001", 0.491979},
      {"11010", 0.491329}, {"11011", 0.490566}, {"11100", 0.489796},
      {"11101", 0.492754}, {"11110", 0.492188}, {"11111", 0.491667},
  };
  return t;
}

inline double binomial_pmf(std::size_t n, std::size_t k, double p) {
  const double logc = std::lgamma(static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0);
  return std::exp(logc + static_cast<double>(k) * std::log(p) +
                  static_cast<double>(n - k) * std::log1p(-p));
}

// Exact distribution of the number of survivors after the k rounds when n
// stations start, by enumerating the number of emitters in every round.
// Index s of the result is P[s survivors].
inline std::vector<double> survivors_exact(const crp::ProbabilityTree& tree, std::size_t n) {
  // state[w][s]: probability of having heard word w with s stations left.
  std::vector<std::vector<double>> state(1, std::vector<double>(n + 1, 0.0));
  state[0][n] = 1.0;
  for (unsigned l = 0; l < tree.depth(); ++l) {
    std::vector<std::vector<double>> next(state.size() * 2, std::vector<double>(n + 1, 0.0));
    for (std::size_t v = 0; v < state.size(); ++v) {
      const double p = tree.p(crp::Word(l, v));
      for (std::size_t s = 1; s <= n; ++s) {
        const double mass = state[v][s];
        if (mass == 0.0) continue;
        next[2 * v][s] += mass * binomial_pmf(s, 0, p);
        for (std::size_t e = 1; e <= s; ++e) {
          next[2 * v + 1][e] += mass * binomial_pmf(s, e, p);
        }
      }
    }
    state.swap(next);
  }
  std::vector<double> out(n + 1, 0.0);
  for (const auto& row : state) {
    for (std::size_t s = 0; s <= n; ++s) out[s] += row[s];
  }
  return out;
}

inline double collision_exact(const crp::ProbabilityTree& tree, std::size_t n) {
  return 1.0 - survivors_exact(tree, n)[1];
}

// y_w straight from its definition: sum of delta_v over same-length v < w,
// with delta_v the product of branch probabilities along v.
inline double delta_by_product(const crp::ProbabilityTree& tree, const crp::Word& w) {
  double d = 1.0;
  for (unsigned i = 0; i < w.length(); ++i) {
    const crp::Word prefix(i, w.value() >> (w.length() - i));
    const double p = tree.p(prefix);
    d *= w.bit(i) ? p : 1.0 - p;
  }
  return d;
}

inline double y_by_definition(const crp::ProbabilityTree& tree, const crp::Word& w) {
  double y = 0.0;
  for (std::uint64_t v = 0; v < w.value(); ++v) {
    y += delta_by_product(tree, crp::Word(w.length(), v));
  }
  return y;
}

// Quadratic grid DP: best lower sum of `slope` (samples of f' on the grid
// 0..M) with `pieces` steps.
inline double best_lower_sum_quadratic(const std::vector<double>& slope, std::size_t pieces) {
  const std::size_t M = slope.size() - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(M + 1, -inf);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= pieces; ++j) {
    std::vector<double> cur(M + 1, -inf);
    for (std::size_t b = 1; b <= M; ++b) {
      for (std::size_t a = 0; a < b; ++a) {
        if (prev[a] == -inf) continue;
        const double v = prev[a] + static_cast<double>(b - a) / M * slope[a];
        if (v > cur[b]) cur[b] = v;
      }
    }
    prev.swap(cur);
  }
  return prev[M];
}

// Every strictly increasing interior choice on the grid, for tiny M.
inline double best_lower_sum_exhaustive(const std::vector<double>& slope, std::size_t pieces) {
  const std::size_t M = slope.size() - 1;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(pieces + 1);
  idx[0] = 0;
  idx[pieces] = M;
  auto recurse = [&](auto&& self, std::size_t j) -> void {
    if (j == pieces) {
      double s = 0.0;
      for (std::size_t i = 1; i <= pieces; ++i) {
        s += static_cast<double>(idx[i] - idx[i - 1]) / M * slope[idx[i - 1]];
      }
      best = std::max(best, s);
      return;
    }
    for (std::size_t b = idx[j - 1] + 1; b + (pieces - j) <= M; ++b) {
      idx[j] = b;
      self(self, j + 1);
    }
  };
  if (pieces == 1) {
    return slope[0];
  }
  recurse(recurse, 1);
  return best;
}

// Upper-tail p-value of Pearson's statistic against equal expected counts.
template <typename Count>
double chi_square_uniform_pvalue(const std::vector<Count>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace oracle
