#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "crp/distributions.hpp"
#include "crp/json_io.hpp"

namespace {

using crp::Polynomial;
using crp::StationDistribution;

TEST(PowerLaw, UniformWhenAlphaIsZero) {
  const auto d = crp::make_power_law(0.0, 3);
  EXPECT_DOUBLE_EQ(d.weight(2), 0.5);
  EXPECT_DOUBLE_EQ(d.weight(3), 0.5);
  EXPECT_EQ(d.weight(1), 0.0);
  EXPECT_EQ(d.weight(4), 0.0);
}

TEST(PowerLaw, AlphaOneOverTwoAndThree) {
  const auto d = crp::make_power_law(1.0, 3);
  EXPECT_NEAR(d.weight(2), 3.0 / 5.0, 1e-15);
  EXPECT_NEAR(d.weight(3), 2.0 / 5.0, 1e-15);
}

TEST(PowerLaw, MatchesDirectSummation) {
  double norm = 0.0;
  for (int i = 2; i <= 100; ++i) norm += std::pow(i, -0.7);
  const double q2 = std::pow(2.0, -0.7) / norm;
  // Same value from a 30-digit evaluation.
  EXPECT_NEAR(q2, 0.0647171472880543338859, 1e-15);

  const auto d = crp::make_power_law(0.7, 100);
  EXPECT_NEAR(d.weight(2), q2, 1e-15);
  EXPECT_EQ(d.alpha(), 0.7);
  EXPECT_EQ(d.n_max(), 100);
}

TEST(PowerLaw, WeightsNonincreasing) {
  for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
    const auto d = crp::make_power_law(alpha, 60);
    for (int n = 3; n <= 60; ++n) EXPECT_LE(d.weight(n), d.weight(n - 1));
  }
}

TEST(PowerLaw, RejectsSmallNmax) {
  EXPECT_THROW(crp::make_power_law(0.5, 1), crp::InvalidArgument);
  EXPECT_THROW(crp::make_power_law(0.5, 0), crp::InvalidArgument);
}

TEST(StationDistribution, ValidatesWeights) {
  EXPECT_THROW(StationDistribution({{2, 0.5}, {3, 0.4}}), crp::InvalidArgument);
  EXPECT_THROW(StationDistribution({{0, 1.0}}), crp::InvalidArgument);
  EXPECT_THROW(StationDistribution({{2, -0.1}, {3, 1.1}}), crp::InvalidArgument);
  EXPECT_THROW(StationDistribution(std::map<int, double>{}), crp::InvalidArgument);
  EXPECT_NO_THROW(StationDistribution({{1, 1.0}}));
  EXPECT_NO_THROW(StationDistribution({{2, 0.5}, {3, 0.5 + 5e-13}}));
}

TEST(GeneratingFunction, PointMassAtOne) {
  const auto f = crp::gf_from_distribution(StationDistribution({{1, 1.0}}));
  EXPECT_EQ(f, Polynomial({0.0, 1.0}));
  EXPECT_EQ(f(1.0), 1.0);
}

TEST(GeneratingFunction, TwoPointDistribution) {
  const auto f = crp::gf_from_distribution(crp::make_power_law(0.0, 3));
  EXPECT_EQ(f, Polynomial({0.0, 0.0, 0.5, 0.5}));
}

TEST(GeneratingFunction, PowerLawNormalized) {
  const auto d = crp::make_power_law(0.7, 100);
  const auto f = crp::gf_from_distribution(d);
  EXPECT_EQ(f.degree(), 100u);
  EXPECT_NEAR(f(1.0), 1.0, 1e-12);
  EXPECT_EQ(f(0.0), 0.0);
  // f'(1) is the mean station count.
  double mean = 0.0;
  for (const auto& [n, q] : d.weights()) mean += n * q;
  EXPECT_NEAR(f.derivative(1)(1.0), mean, 1e-10);
  EXPECT_NEAR(d.mean(), mean, 1e-12);
  // f''(0) = 2 q_2.
  EXPECT_NEAR(f.derivative(2)(0.0), 2.0 * d.weight(2), 1e-15);
}

TEST(Polynomial, Derivatives) {
  EXPECT_EQ(Polynomial({0.0, 0.0, 1.0}).derivative(1), Polynomial({0.0, 2.0}));
  const Polynomial f({0.0, 0.0, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(f.derivative(2)(0.0), 1.0);
  EXPECT_EQ(f.derivative(0), f);
  EXPECT_TRUE(f.derivative(4).is_zero());
  EXPECT_TRUE(f.derivative(10).is_zero());
  EXPECT_EQ(crp::derivative(f, 3), Polynomial({3.0}));
}

TEST(Polynomial, Evaluation) {
  EXPECT_DOUBLE_EQ(crp::eval(Polynomial({0.0, 0.0, 1.0}), 0.5), 0.25);
  EXPECT_EQ(Polynomial().degree(), 0u);
  EXPECT_TRUE(Polynomial({0.0, 0.0}).is_zero());
}

TEST(Polynomial, ComposeAffineMatchesPointwise) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(12);
    for (auto& x : c) x = u(gen);
    const Polynomial f(c);
    const double a = u(gen);
    const double b = u(gen);
    const Polynomial g = f.compose_affine(a, b);
    for (double x : {0.0, 0.25, 0.6, 1.0}) {
      EXPECT_NEAR(g(x), f(a * x + b), 1e-12 * (1.0 + std::abs(f(a * x + b))));
    }
  }
}

TEST(GeneratingFunction, MonotoneAndNonnegativeOnUnitInterval) {
  const auto f = crp::gf_from_distribution(crp::make_power_law(0.7, 100));
  for (unsigned order = 0; order <= 3; ++order) {
    const Polynomial d = f.derivative(order);
    double prev = d(0.0);
    EXPECT_GE(prev, 0.0);
    for (int i = 1; i <= 200; ++i) {
      const double v = d(i / 200.0);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(DistributionJson, RoundTrip) {
  const auto d = crp::make_power_law(0.7, 20);
  const auto j = crp::to_json(d);
  EXPECT_EQ(j.at("alpha"), 0.7);
  EXPECT_EQ(j.at("n_max"), 20);
  EXPECT_EQ(j.at("weights").size(), 19u);
  const auto back = crp::distribution_from_json(j);
  EXPECT_EQ(back.weights(), d.weights());
  EXPECT_EQ(back.alpha(), d.alpha());

  const auto explicit_weights =
      crp::distribution_from_json(crp::json::parse(R"({"weights": {"2": 1.0}})"));
  EXPECT_EQ(explicit_weights.weight(2), 1.0);
  EXPECT_FALSE(explicit_weights.alpha().has_value());

  EXPECT_THROW(crp::distribution_from_json(crp::json::parse(R"({"weights": {"x": 1.0}})")),
               crp::InvalidArgument);
  EXPECT_THROW(crp::distribution_from_json(crp::json::parse(R"({"n_max": 3})")),
               crp::InvalidArgument);
}

}  // namespace
