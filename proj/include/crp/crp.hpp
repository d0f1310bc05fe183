#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "crp/distributions.hpp"
#include "crp/errors.hpp"
#include "crp/rng.hpp"
#include "crp/tree.hpp"

namespace crp {

struct CrpOutcome {
  std::size_t survivors = 0;
  std::optional<std::size_t> winner;
  Word try_bits;  // r(1)...r(k)

  bool success() const noexcept { return winner.has_value(); }
};

// Runs the k signalling rounds among n stations. Buffers are reused across
// calls, so one runner per thread.
class CrpRunner {
 public:
  explicit CrpRunner(const ProbabilityTree& tree) : tree_(&tree) {}

  CrpOutcome run(std::size_t n, Rng& rng) {
    if (n < 1) throw InvalidArgument("need at least one station");
    alive_.resize(n);
    for (std::size_t i = 0; i < n; ++i) alive_[i] = static_cast<std::uint32_t>(i);
    Word heard;
    for (unsigned t = 0; t < tree_->depth(); ++t) {
      const double p = tree_->p(heard);
      emitters_.clear();
      for (std::uint32_t s : alive_) {
        if (rng.uniform() < p) emitters_.push_back(s);
      }
      const bool signal = !emitters_.empty();
      // Silent stations withdraw only when someone else signalled.
      if (signal) alive_.swap(emitters_);
      heard = heard.append(signal);
    }
    CrpOutcome out;
    out.survivors = alive_.size();
    out.try_bits = heard;
    if (alive_.size() == 1) out.winner = alive_.front();
    return out;
  }

 private:
  const ProbabilityTree* tree_;
  std::vector<std::uint32_t> alive_;
  std::vector<std::uint32_t> emitters_;
};

inline CrpOutcome run_crp(const ProbabilityTree& tree, std::size_t n, Rng& rng) {
  CrpRunner runner(tree);
  return runner.run(n, rng);
}

// 1 - sum_i (z_i - z_{i-1}) n z_{i-1}^{n-1}: the collision rate when exactly
// n stations contend (f = x^n).
inline double collision_rate_fixed_n(const Partition& z, std::size_t n) {
  if (n < 1) throw InvalidArgument("need at least one station");
  if (n == 1) return 0.0;
  const auto& pts = z.points();
  const double dn = static_cast<double>(n);
  double rho = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    rho += (pts[i] - pts[i - 1]) * dn * std::pow(pts[i - 1], dn - 1.0);
  }
  return 1.0 - rho;
}

// Generating function g of the number of stations left after the k rounds.
class SurvivorDistribution {
 public:
  explicit SurvivorDistribution(Polynomial g) : g_(std::move(g)) {
    if (g_.coefficient(0) != 0.0) {
      throw InvalidArgument("survivor distribution has mass at zero stations");
    }
  }

  const Polynomial& poly() const noexcept { return g_; }
  // Probability that exactly one station survives: g'(0).
  double success_probability() const noexcept { return g_.coefficient(1); }
  double probability(std::size_t survivors) const noexcept {
    return g_.coefficient(survivors);
  }

 private:
  Polynomial g_;
};

// Propagates f_{w1}(x) = f_w(p_w x + 1 - p_w) - f_w(1 - p_w) and
// f_{w0}(x) = f_w((1 - p_w) x) down to the 2^k leaves and sums them.
inline SurvivorDistribution survivor_distribution(const ProbabilityTree& tree,
                                                  const Polynomial& f) {
  if (f.coefficient(0) != 0.0) {
    throw InvalidArgument("generating function must have zero constant term");
  }
  struct Frame {
    Word w;
    Polynomial fw;
  };
  Polynomial g;
  std::vector<Frame> stack;
  stack.push_back({Word(), f});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    if (frame.w.length() == tree.depth()) {
      g += frame.fw;
      continue;
    }
    const double p = tree.p(frame.w);
    std::vector<double> emitted = frame.fw.compose_affine(p, 1.0 - p).coefficients();
    emitted[0] = 0.0;
    stack.push_back({frame.w.append(true), Polynomial(std::move(emitted))});
    stack.push_back({frame.w.append(false), frame.fw.compose_affine(1.0 - p, 0.0)});
  }
  std::vector<double> c = g.coefficients();
  c[0] = 0.0;
  return SurvivorDistribution(Polynomial(std::move(c)));
}

struct CollisionEstimate {
  double rate;
  double standard_error;
  std::uint64_t trials;
};

inline CollisionEstimate monte_carlo_collision(const ProbabilityTree& tree,
                                               std::size_t n,
                                               std::uint64_t trials, Rng& rng) {
  if (trials < 1) throw InvalidArgument("need at least one trial");
  CrpRunner runner(tree);
  std::uint64_t collisions = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    if (!runner.run(n, rng).success()) ++collisions;
  }
  const double rate = static_cast<double>(collisions) / static_cast<double>(trials);
  return {rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials)), trials};
}

// Wins per station index over the successful trials.
inline std::vector<std::uint64_t> winner_histogram(const ProbabilityTree& tree,
                                                   std::size_t n,
                                                   std::uint64_t trials,
                                                   Rng& rng) {
  if (trials < 1) throw InvalidArgument("need at least one trial");
  CrpRunner runner(tree);
  std::vector<std::uint64_t> wins(n, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const CrpOutcome out = runner.run(n, rng);
    if (out.winner) ++wins[*out.winner];
  }
  return wins;
}

}  // namespace crp
