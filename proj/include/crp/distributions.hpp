#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crp/errors.hpp"

namespace crp {

// Dense polynomial with real coefficients; coefficient i multiplies x^i.
// Trailing zero coefficients are trimmed, the zero polynomial is {0}.
class Polynomial {
 public:
  Polynomial() : coefficients_{0.0} {}

  explicit Polynomial(std::vector<double> coefficients)
      : coefficients_(std::move(coefficients)) {
    trim();
  }

  static Polynomial monomial(std::size_t power, double coefficient = 1.0) {
    std::vector<double> c(power + 1, 0.0);
    c[power] = coefficient;
    return Polynomial(std::move(c));
  }

  const std::vector<double>& coefficients() const noexcept {
    return coefficients_;
  }

  std::size_t degree() const noexcept { return coefficients_.size() - 1; }

  bool is_zero() const noexcept {
    return coefficients_.size() == 1 && coefficients_[0] == 0.0;
  }

  double coefficient(std::size_t power) const noexcept {
    return power < coefficients_.size() ? coefficients_[power] : 0.0;
  }

  double operator()(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
      acc = acc * x + *it;
    }
    return acc;
  }

  Polynomial derivative(unsigned order = 1) const {
    if (order == 0) return *this;
    if (order > degree()) return Polynomial();
    std::vector<double> out(coefficients_.size() - order);
    for (std::size_t i = 0; i < out.size(); ++i) {
      double falling = 1.0;
      for (unsigned j = 0; j < order; ++j) {
        falling *= static_cast<double>(i + order - j);
      }
      out[i] = coefficients_[i + order] * falling;
    }
    return Polynomial(std::move(out));
  }

  // x -> p(scale * x + shift). Taylor shift by repeated synthetic
  // multiplication; for nonnegative coefficients and shift every operation
  // is an addition of nonnegative terms.
  Polynomial compose_affine(double scale, double shift) const {
    const std::size_t n = coefficients_.size();
    std::vector<double> shifted(n, 0.0);
    shifted[0] = coefficients_[n - 1];
    std::size_t len = 1;
    for (std::size_t i = n - 1; i-- > 0;) {
      // shifted <- shifted * (x + shift) + c_i
      shifted[len] = shifted[len - 1];
      for (std::size_t j = len - 1; j > 0; --j) {
        shifted[j] = shifted[j - 1] + shift * shifted[j];
      }
      shifted[0] = shift * shifted[0] + coefficients_[i];
      ++len;
    }
    double power = 1.0;
    for (auto& c : shifted) {
      c *= power;
      power *= scale;
    }
    return Polynomial(std::move(shifted));
  }

  Polynomial& operator+=(const Polynomial& other) {
    if (other.coefficients_.size() > coefficients_.size()) {
      coefficients_.resize(other.coefficients_.size(), 0.0);
    }
    for (std::size_t i = 0; i < other.coefficients_.size(); ++i) {
      coefficients_[i] += other.coefficients_[i];
    }
    trim();
    return *this;
  }

  friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) {
    lhs += rhs;
    return lhs;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void trim() {
    while (coefficients_.size() > 1 && coefficients_.back() == 0.0) {
      coefficients_.pop_back();
    }
    if (coefficients_.empty()) coefficients_.push_back(0.0);
  }

  std::vector<double> coefficients_;
};

inline double eval(const Polynomial& poly, double x) { return poly(x); }

inline Polynomial derivative(const Polynomial& poly, unsigned order) {
  return poly.derivative(order);
}

// Probability q_n that exactly n stations contend, n >= 1, finite support.
class StationDistribution {
 public:
  static constexpr double kNormalizationTolerance = 1e-12;

  explicit StationDistribution(std::map<int, double> weights,
                               std::optional<double> alpha = std::nullopt,
                               std::optional<int> n_max = std::nullopt)
      : weights_(std::move(weights)), alpha_(alpha) {
    if (weights_.empty()) {
      throw InvalidArgument("station distribution has empty support");
    }
    double total = 0.0;
    for (const auto& [n, q] : weights_) {
      if (n < 1) {
        throw InvalidArgument("station count " + std::to_string(n) +
                              " is below 1");
      }
      if (!(q >= 0.0) || !std::isfinite(q)) {
        throw InvalidArgument("weight for n=" + std::to_string(n) +
                              " is negative or not finite");
      }
      total += q;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw InvalidArgument("weights sum to " + std::to_string(total) +
                            ", expected 1");
    }
    n_max_ = n_max.value_or(weights_.rbegin()->first);
  }

  const std::map<int, double>& weights() const noexcept { return weights_; }

  double weight(int n) const {
    auto it = weights_.find(n);
    return it == weights_.end() ? 0.0 : it->second;
  }

  std::optional<double> alpha() const noexcept { return alpha_; }
  int n_max() const noexcept { return n_max_; }
  int max_count() const noexcept { return weights_.rbegin()->first; }

  double mean() const {
    double m = 0.0;
    for (const auto& [n, q] : weights_) m += n * q;
    return m;
  }

 private:
  std::map<int, double> weights_;
  std::optional<double> alpha_;
  int n_max_ = 0;
};

// q_n proportional to n^-alpha on {2, ..., n_max}.
inline StationDistribution make_power_law(double alpha, int n_max) {
  if (n_max < 2) {
    throw InvalidArgument("n_max must be at least 2, got " +
                          std::to_string(n_max));
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("alpha must lie in [0, 1]");
  }
  std::map<int, double> weights;
  double norm = 0.0;
  for (int n = 2; n <= n_max; ++n) {
    const double w = std::pow(static_cast<double>(n), -alpha);
    weights[n] = w;
    norm += w;
  }
  for (auto& [n, w] : weights) w /= norm;
  return StationDistribution(std::move(weights), alpha, n_max);
}

// f(x) = sum_n q_n x^n.
inline Polynomial gf_from_distribution(const StationDistribution& dist) {
  std::vector<double> c(static_cast<std::size_t>(dist.max_count()) + 1, 0.0);
  for (const auto& [n, q] : dist.weights()) c[static_cast<std::size_t>(n)] = q;
  return Polynomial(std::move(c));
}

}  // namespace crp
