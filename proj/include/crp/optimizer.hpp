#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crp/distributions.hpp"
#include "crp/errors.hpp"
#include "crp/tree.hpp"

namespace crp {

inline constexpr std::size_t kDefaultGridSize = 65536;
inline constexpr std::size_t kDefaultQuadraturePanels = 100000;

// rho = sum_i (z_i - z_{i-1}) f'(z_{i-1}): the lower Riemann sum of f'.
inline double success_probability(const Polynomial& f, const Partition& z) {
  const Polynomial df = f.derivative(1);
  const auto& pts = z.points();
  double rho = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    rho += (pts[i] - pts[i - 1]) * df(pts[i - 1]);
  }
  return rho;
}

// Midpoint rule for the integral of sqrt(f'') over [0, 1].
inline double sqrt_curvature_integral(
    const Polynomial& f, std::size_t panels = kDefaultQuadraturePanels) {
  if (panels == 0) throw InvalidArgument("quadrature needs at least one panel");
  const Polynomial d2 = f.derivative(2);
  const double h = 1.0 / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    sum += std::sqrt(std::max(0.0, d2((static_cast<double>(i) + 0.5) * h)));
  }
  return sum * h;
}

// Quantiles of the density sqrt(f'') sampled at the M grid midpoints.
// z_j = (1/M) min{ i : H(i)/H(M) >= j/m }.
inline Partition quantile_partition(const Polynomial& f, unsigned k,
                                    std::size_t grid_size = kDefaultGridSize) {
  if (k < 1 || k > ProbabilityTree::kMaxDepth) {
    throw InvalidArgument("depth k out of range");
  }
  const std::size_t m = std::size_t{1} << k;
  if (grid_size < 64 * m) {
    throw InvalidArgument("grid size " + std::to_string(grid_size) +
                          " must be at least 64 * 2^k = " +
                          std::to_string(64 * m));
  }
  const Polynomial d2 = f.derivative(2);
  if (d2.is_zero()) {
    throw PreconditionViolated("f'' is identically zero; no density to split");
  }
  const double M = static_cast<double>(grid_size);
  std::vector<double> H(grid_size + 1);
  H[0] = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    H[i + 1] = H[i] + std::sqrt(std::max(
                          0.0, d2((static_cast<double>(i) + 0.5) / M)));
  }
  const double total = H[grid_size];
  // Ties that only differ by accumulated rounding count as reached.
  const double slack = 1e-12 * total;

  std::vector<double> z(m + 1);
  z[0] = 0.0;
  z[m] = 1.0;
  std::size_t i = 0;
  for (std::size_t j = 1; j < m; ++j) {
    const double target = static_cast<double>(j) / static_cast<double>(m);
    while (i < grid_size && H[i] < target * total - slack) ++i;
    z[j] = static_cast<double>(i) / M;
    if (!(z[j] > z[j - 1]) || !(z[j] < 1.0)) {
      throw DegeneratePartition("quantiles " + std::to_string(j - 1) + " and " +
                                std::to_string(j) +
                                " coincide on the grid (M = " +
                                std::to_string(grid_size) + ")");
    }
  }
  return Partition(std::move(z));
}

namespace detail {

inline constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

// One layer of the grid DP:
//   next[b] = max_{a < b} prev[a] + (b - a)/M * slope[a]
// For fixed a the candidate is a line in x = b/M with slope f'(a/M); slopes
// are nondecreasing in a and queries increase, so a monotone upper hull
// answers every b in amortized O(1).
class LowerSumLayer {
 public:
  LowerSumLayer(std::vector<double> slopes, std::size_t pieces)
      : slopes_(std::move(slopes)),
        grid_(slopes_.size() - 1),
        pieces_(pieces) {}

  std::size_t grid() const noexcept { return grid_; }

  // Layer j (1-based pieces used) from layer j-1. Entries outside
  // [j, grid - (pieces - j)] are -inf. When `arg` is non-null it receives the
  // maximizing predecessor for every reachable b.
  void advance(const std::vector<double>& prev, std::size_t j,
               std::vector<double>& next, std::vector<std::int32_t>* arg) const {
    next.assign(grid_ + 1, kMinusInf);
    if (arg) arg->assign(grid_ + 1, -1);
    const std::size_t lo = j;
    const std::size_t hi = grid_ - (pieces_ - j);
    const double M = static_cast<double>(grid_);

    hull_.clear();
    std::size_t head = 0;
    for (std::size_t b = lo; b <= hi; ++b) {
      const std::size_t a = b - 1;
      if (prev[a] != kMinusInf) {
        add_line({slopes_[a], prev[a] - slopes_[a] * static_cast<double>(a) / M,
                  static_cast<std::int32_t>(a)},
                 head);
      }
      if (head >= hull_.size()) continue;
      const double x = static_cast<double>(b) / M;
      while (head + 1 < hull_.size() &&
             hull_[head + 1].at(x) >= hull_[head].at(x)) {
        ++head;
      }
      next[b] = hull_[head].at(x);
      if (arg) (*arg)[b] = hull_[head].source;
    }
  }

 private:
  struct Line {
    double slope;
    double intercept;
    std::int32_t source;
    double at(double x) const { return slope * x + intercept; }
  };

  void add_line(const Line& line, std::size_t& head) const {
    if (hull_.size() > head && hull_.back().slope == line.slope) {
      if (hull_.back().intercept >= line.intercept) return;
      hull_.pop_back();
    }
    while (hull_.size() >= head + 2) {
      const Line& l1 = hull_[hull_.size() - 2];
      const Line& l2 = hull_.back();
      const long double lhs = static_cast<long double>(line.intercept - l1.intercept) *
                              (l2.slope - l1.slope);
      const long double rhs = static_cast<long double>(l2.intercept - l1.intercept) *
                              (line.slope - l1.slope);
      if (lhs >= rhs) {
        hull_.pop_back();
      } else {
        break;
      }
    }
    hull_.push_back(line);
    if (head > hull_.size() - 1) head = hull_.size() - 1;
  }

  std::vector<double> slopes_;
  std::size_t grid_;
  std::size_t pieces_;
  mutable std::vector<Line> hull_;
};

}  // namespace detail

// Exact maximizer of the lower Riemann sum of f' over partitions with
// `pieces` steps whose points lie on {0, 1/M, ..., 1}. Layers are
// checkpointed every ~sqrt(pieces) so memory stays O(sqrt(pieces) * M).
inline Partition dp_optimal_partition(const Polynomial& f, std::size_t pieces,
                                      std::size_t grid_size = kDefaultGridSize) {
  if (pieces < 1) throw InvalidArgument("need at least one piece");
  if (grid_size < pieces) {
    throw InvalidArgument("grid size must be at least the number of pieces");
  }
  if (grid_size > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw InvalidArgument("grid size too large");
  }
  const Polynomial df = f.derivative(1);
  const double M = static_cast<double>(grid_size);
  std::vector<double> slopes(grid_size + 1);
  for (std::size_t a = 0; a <= grid_size; ++a) {
    slopes[a] = df(static_cast<double>(a) / M);
  }
  const detail::LowerSumLayer layer(std::move(slopes), pieces);

  const std::size_t block = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pieces)))));

  std::vector<std::vector<double>> checkpoints;
  std::vector<double> current(grid_size + 1, detail::kMinusInf);
  current[0] = 0.0;
  std::vector<double> next;
  for (std::size_t j = 1; j <= pieces; ++j) {
    if ((j - 1) % block == 0) checkpoints.push_back(current);
    layer.advance(current, j, next, nullptr);
    current.swap(next);
  }

  std::vector<std::size_t> b_of_layer(pieces + 1);
  b_of_layer[pieces] = grid_size;
  b_of_layer[0] = 0;
  std::vector<std::vector<std::int32_t>> args;
  for (std::size_t c = checkpoints.size(); c-- > 0;) {
    const std::size_t first = c * block;  // layer stored in checkpoints[c]
    const std::size_t last = std::min(pieces, first + block);
    args.assign(last - first, {});
    std::vector<double> cur = checkpoints[c];
    for (std::size_t j = first + 1; j <= last; ++j) {
      layer.advance(cur, j, next, &args[j - first - 1]);
      cur.swap(next);
    }
    for (std::size_t j = last; j > first; --j) {
      const std::int32_t a = args[j - first - 1][b_of_layer[j]];
      if (a < 0) throw NumericError("grid DP lost its optimal path");
      b_of_layer[j - 1] = static_cast<std::size_t>(a);
    }
  }

  std::vector<double> z(pieces + 1);
  for (std::size_t j = 0; j <= pieces; ++j) {
    z[j] = static_cast<double>(b_of_layer[j]) / M;
  }
  z.back() = 1.0;
  return Partition(std::move(z));
}

struct SingleStepOptimum {
  double z;
  // Whether z * phi(z) was convex on the sampling grid; the root is only
  // guaranteed optimal when it is.
  bool convex;
};

// Root in (0,1) of (1 - z) phi'(z) = phi(z) with phi = f'/f'(1), by
// bisection to 1e-10.
inline SingleStepOptimum single_step_optimum(const Polynomial& f) {
  const Polynomial d1 = f.derivative(1);
  const Polynomial d2 = f.derivative(2);
  const double scale = d1(1.0);
  if (!(scale > 0.0)) throw PreconditionViolated("f'(1) must be positive");
  auto phi = [&](double z) { return d1(z) / scale; };
  auto g = [&](double z) { return (1.0 - z) * d2(z) / scale - phi(z); };

  constexpr int kConvexitySamples = 1000;
  bool convex = true;
  auto zphi = [&](double z) { return z * phi(z); };
  for (int i = 1; i < kConvexitySamples; ++i) {
    const double h = 1.0 / kConvexitySamples;
    const double z = i * h;
    if (zphi(z - h) - 2.0 * zphi(z) + zphi(z + h) < -1e-12) {
      convex = false;
      break;
    }
  }

  // g(0) vanishes when f has no x^2 term, so bracket from a grid instead:
  // the last positive sample before the first nonpositive one.
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 1; i <= kConvexitySamples; ++i) {
    const double z = static_cast<double>(i) / kConvexitySamples;
    if (g(z) > 0.0) {
      lo = z;
    } else if (lo >= 0.0) {
      hi = z;
      break;
    }
  }
  if (lo < 0.0) {
    throw RootNotFound("(1 - z) phi'(z) - phi(z) has no sign change on (0, 1)");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), convex};
}

// Asymptotic optimal collision rate (int sqrt f'')^2 / 2^(k+1).
inline double asymptotic_collision(const Polynomial& f, unsigned k,
                                   std::size_t panels = kDefaultQuadraturePanels) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const double I = sqrt_curvature_integral(f, panels);
  return I * I / std::ldexp(1.0, static_cast<int>(k) + 1);
}

// Candidate constants C for the m^{-3/2} correction of the lower bound
// (int sqrt f'')^2/(2m) - C m^{-3/2}. All share the denominator
// 3 sqrt(2) f''(0)^{3/2}; they differ in the numerator.
struct CorrectionConstants {
  double third_derivative_at_one;   // f'''(1): uniform bound, used
  double second_derivative_at_one;  // f''(1)
  double third_derivative_at_zero;  // f'''(0)
};

inline CorrectionConstants correction_constants(const Polynomial& f) {
  const double f2_0 = f.derivative(2)(0.0);
  if (!(f2_0 > 0.0)) {
    throw PreconditionViolated("lower bound requires f''(0) > 0");
  }
  const double denom = 3.0 * std::sqrt(2.0) * std::pow(f2_0, 1.5);
  const Polynomial d3 = f.derivative(3);
  return {d3(1.0) / denom, f.derivative(2)(1.0) / denom, d3(0.0) / denom};
}

inline double lower_bound_collision(const Polynomial& f, std::size_t pieces,
                                    std::size_t panels = kDefaultQuadraturePanels) {
  if (pieces < 1) throw InvalidArgument("need at least one piece");
  const CorrectionConstants c = correction_constants(f);
  const double I = sqrt_curvature_integral(f, panels);
  const double m = static_cast<double>(pieces);
  const double bound =
      I * I / (2.0 * m) - c.third_derivative_at_one * std::pow(m, -1.5);
  return std::max(0.0, bound);
}

enum class TuningMethod { quantile, dp, uniform };

inline std::string_view to_string(TuningMethod method) {
  switch (method) {
    case TuningMethod::quantile:
      return "quantile";
    case TuningMethod::dp:
      return "dp";
    case TuningMethod::uniform:
      return "uniform";
  }
  return "?";
}

inline TuningMethod parse_tuning_method(std::string_view name) {
  if (name == "quantile") return TuningMethod::quantile;
  if (name == "dp") return TuningMethod::dp;
  if (name == "uniform") return TuningMethod::uniform;
  throw InvalidArgument("unknown tuning method '" + std::string(name) + "'");
}

struct TuningReport {
  TuningMethod method;
  unsigned k;
  std::size_t grid_size;
  Partition partition;
  ProbabilityTree tree;
  double rho;
  double asymptotic_bound;
  // Absent when f''(0) = 0.
  std::optional<double> lower_bound;
  std::optional<CorrectionConstants> correction;
};

inline TuningReport tune(const Polynomial& f, unsigned k, TuningMethod method,
                         std::size_t grid_size = kDefaultGridSize) {
  if (k < 1 || k > ProbabilityTree::kMaxDepth) {
    throw InvalidArgument("depth k out of range");
  }
  const std::size_t m = std::size_t{1} << k;
  Partition z = [&] {
    switch (method) {
      case TuningMethod::quantile:
        return quantile_partition(f, k, grid_size);
      case TuningMethod::dp:
        return dp_optimal_partition(f, m, grid_size);
      case TuningMethod::uniform:
        break;
    }
    return Partition::uniform(m);
  }();
  ProbabilityTree tree = partition_to_tree(z);
  const double rho = success_probability(f, z);
  std::optional<double> lower;
  std::optional<CorrectionConstants> constants;
  if (f.derivative(2)(0.0) > 0.0) {
    lower = lower_bound_collision(f, m);
    constants = correction_constants(f);
  }
  return TuningReport{method,
                      k,
                      grid_size,
                      std::move(z),
                      std::move(tree),
                      rho,
                      asymptotic_collision(f, k),
                      lower,
                      constants};
}

}  // namespace crp
