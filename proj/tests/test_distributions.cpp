#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lossnet/distributions.hpp"
#include "lossnet/random.hpp"

using namespace lossnet;

namespace {

// Reference values from 40-digit summation of the closed-form pmfs.
constexpr double kExample1Mean = 485.80231617556755;
constexpr double kExample1Atom = 0.22970548051996673;
constexpr double kExample1Tail500 = 0.24310680142468599;
constexpr double kStretchedTail100 = 0.0047673366276332403;
constexpr double kStretchedMean = 11.777761512834550;

double direct_tail(const DemandDistribution& d, std::int64_t x) {
  double s = 0.0;
  for (std::int64_t i = x + 1; i <= d.support_max(); ++i) s += d.pmf(i);
  return s;
}

double direct_mean(const DemandDistribution& d) {
  double s = 0.0;
  for (std::int64_t i = 0; i <= d.support_max(); ++i) s += static_cast<double>(i) * d.pmf(i);
  return s;
}

void expect_well_formed(const DemandDistribution& d) {
  double total = 0.0;
  for (double p : d.pmf()) {
    EXPECT_GE(p, 0.0);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  const auto cum = d.cum();
  EXPECT_DOUBLE_EQ(cum.back(), 1.0);
  for (std::int64_t x = 0; x <= d.support_max(); ++x) {
    EXPECT_NEAR(d.tail(x) + cum[static_cast<std::size_t>(x)], 1.0, 1e-12);
    if (x > 0) EXPECT_LE(d.tail(x), d.tail(x - 1));
  }
  EXPECT_EQ(d.tail(d.support_max()), 0.0);
  EXPECT_EQ(d.tail(d.support_max() + 17), 0.0);
  EXPECT_NEAR(d.mean(), direct_mean(d), 1e-9 * std::max(1.0, direct_mean(d)));
}

}  // namespace

TEST(PowerLaw, MatchesExampleOnePmf) {
  const auto d = build_truncated_power_law(0.3, 1.5, 2000);
  EXPECT_EQ(d.support_max(), 2000);
  EXPECT_EQ(d.pmf(0), 0.0);
  for (std::int64_t i : {1, 2, 10, 500, 1999}) EXPECT_DOUBLE_EQ(d.pmf(i), 0.3 / std::pow(i, 1.5));
  EXPECT_NEAR(d.pmf(2000), kExample1Atom, 1e-13);
  EXPECT_NEAR(d.mean(), 485.8, 0.5);
  EXPECT_NEAR(d.mean(), kExample1Mean, 1e-9);
  expect_well_formed(d);
}

TEST(PowerLaw, TwoPointCase) {
  const auto d = build_truncated_power_law(0.5, 1.5, 2);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.5);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.5);
}

TEST(PowerLaw, DeclaresSurvivalIndex) {
  const auto d = build_truncated_power_law(0.3, 1.5, 2000);
  const auto& rv = std::get<RegularlyVarying>(d.tail_family());
  EXPECT_DOUBLE_EQ(rv.index, 0.5);
  EXPECT_DOUBLE_EQ(rv.coefficient, 0.6);
}

TEST(PowerLaw, RejectsNegativeRemainder) {
  EXPECT_THROW(build_truncated_power_law(0.9, 1.5, 2000), DistributionError);
  EXPECT_THROW(build_truncated_power_law(0.3, 1.0, 2000), DistributionError);
  EXPECT_THROW(build_truncated_power_law(-0.3, 1.5, 2000), DistributionError);
}

TEST(StretchedExp, ExampleTwoClassOneLaw) {
  const auto d = build_atom_plus_stretched_exp(0.8, 1, 0.15, 2000);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.8);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.15 * std::exp(-std::sqrt(2.0)));
  EXPECT_DOUBLE_EQ(d.pmf(1999), 0.15 * std::exp(-std::sqrt(1999.0)));
  EXPECT_NEAR(d.tail(100), kStretchedTail100, 1e-14);
  EXPECT_NEAR(d.tail(100), direct_tail(d, 100), 1e-12);
  EXPECT_NEAR(d.mean(), kStretchedMean, 1e-9);
  const auto& se = std::get<StretchedExponential>(d.tail_family());
  EXPECT_DOUBLE_EQ(se.shape, 0.5);
  EXPECT_DOUBLE_EQ(se.coefficient, 0.15);
  expect_well_formed(d);
}

TEST(StretchedExp, DegenerateAtom) {
  const auto d = build_atom_plus_stretched_exp(1.0, 1, 0.0, 2);
  EXPECT_DOUBLE_EQ(d.pmf(1), 1.0);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.0);
  EXPECT_TRUE(d.is_point_mass());
  EXPECT_TRUE(std::holds_alternative<Bounded>(d.tail_family()));
}

TEST(StretchedExp, RejectsNegativeRemainder) {
  EXPECT_THROW(build_atom_plus_stretched_exp(0.95, 1, 0.5, 2000), DistributionError);
}

TEST(Geometric, SmallCase) {
  const auto d = build_truncated_geometric(0.5, 3);
  ASSERT_EQ(d.support_max(), 3);
  EXPECT_DOUBLE_EQ(d.pmf(0), 0.0);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.5);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.25);
  EXPECT_DOUBLE_EQ(d.pmf(3), 0.25);
}

TEST(Geometric, ExampleTwoMean) {
  const auto d = build_truncated_geometric(0.6, 2000);
  EXPECT_NEAR(d.mean(), direct_mean(d), 1e-6);
  EXPECT_NEAR(d.mean(), 2.5, 1e-6);
  EXPECT_TRUE(std::holds_alternative<LightTailed>(d.tail_family()));
  expect_well_formed(d);
  EXPECT_THROW(build_truncated_geometric(0.6, 1), DistributionError);
  EXPECT_THROW(build_truncated_geometric(1.0, 10), DistributionError);
}

TEST(Deterministic, PointMasses) {
  const auto d50 = build_deterministic_demand(50);
  EXPECT_EQ(d50.tail(49), 1.0);
  EXPECT_EQ(d50.tail(50), 0.0);
  EXPECT_TRUE(std::holds_alternative<Bounded>(d50.tail_family()));
  const auto d0 = build_deterministic_demand(0);
  for (std::int64_t x : {0, 1, 100}) EXPECT_EQ(d0.tail(x), 0.0);
  EXPECT_EQ(build_deterministic_demand(7).mean(), 7.0);
  EXPECT_THROW(build_deterministic_demand(-1), DistributionError);
}

TEST(Tail, ExampleOneValues) {
  const auto d = build_truncated_power_law(0.3, 1.5, 2000);
  EXPECT_EQ(d.tail(0), 1.0);
  EXPECT_EQ(d.tail(2000), 0.0);
  EXPECT_NEAR(d.tail(500), direct_tail(d, 500), 1e-12);
  EXPECT_NEAR(d.tail(500), kExample1Tail500, 1e-13);
}

TEST(Sampling, PointMassAlwaysSame) {
  RandomStream rng(3);
  const auto d = build_deterministic_demand(50);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_demand(d, rng), 50);
}

TEST(Sampling, DrawsStayInSupport) {
  RandomStream rng(11);
  for (const auto& d : {build_truncated_geometric(0.5, 3), build_atom_plus_stretched_exp(0.8, 1, 0.15, 50),
                        build_truncated_power_law(0.5, 1.5, 2)}) {
    for (int i = 0; i < 20000; ++i) {
      const auto x = sample_demand(d, rng);
      ASSERT_GT(d.pmf(x), 0.0) << "drew " << x;
    }
  }
}

TEST(Sampling, ExampleOneMeanAndKolmogorovSmirnov) {
  const auto d = build_truncated_power_law(0.3, 1.5, 2000);
  RandomStream rng(2024);
  constexpr int kDraws = 1'000'000;
  std::vector<std::uint32_t> hist(static_cast<std::size_t>(d.support_max()) + 1, 0);
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const auto x = sample_demand(d, rng);
    ++hist[static_cast<std::size_t>(x)];
    sum += static_cast<double>(x);
  }
  EXPECT_NEAR(sum / kDraws / d.mean(), 1.0, 0.01);
  double ecdf = 0.0;
  double ks = 0.0;
  for (std::size_t x = 0; x < hist.size(); ++x) {
    ecdf += static_cast<double>(hist[x]) / kDraws;
    ks = std::max(ks, std::abs(ecdf - d.cum()[x]));
  }
  EXPECT_LT(ks, 0.005);
}

TEST(Holding, MeansAndSamplers) {
  EXPECT_EQ(mean_holding(make_exponential(1.0)), 1.0);
  EXPECT_EQ(mean_holding(make_uniform(0.0, 40.0)), 20.0);
  EXPECT_EQ(mean_holding(make_deterministic(2.5)), 2.5);
  EXPECT_THROW(make_exponential(0.0), DistributionError);
  EXPECT_THROW(make_uniform(3.0, 3.0), DistributionError);

  RandomStream rng(5);
  const HoldingDistribution u = make_uniform(1.0, 3.0);
  const HoldingDistribution e = make_exponential(2.0);
  double su = 0.0;
  double se = 0.0;
  constexpr int n = 400'000;
  for (int i = 0; i < n; ++i) {
    const double x = sample_holding(u, rng);
    ASSERT_GE(x, 1.0);
    ASSERT_LT(x, 3.0);
    su += x;
    const double y = sample_holding(e, rng);
    ASSERT_GE(y, 0.0);
    se += y;
  }
  EXPECT_NEAR(su / n, 2.0, 0.01);
  EXPECT_NEAR(se / n, 2.0, 0.02);
  EXPECT_EQ(sample_holding(make_deterministic(4.0), rng), 4.0);
}

TEST(TailFamily, OrderingIsStrictAcrossVariants) {
  const std::vector<TailFamily> ordered = {RegularlyVarying{0.5, 1.0}, RegularlyVarying{1.5, 1.0},
                                           StretchedExponential{0.3, 1.0}, StretchedExponential{0.5, 1.0},
                                           LightTailed{}, Bounded{}};
  for (std::size_t a = 0; a < ordered.size(); ++a) {
    EXPECT_FALSE(heavier_than(ordered[a], ordered[a]));
    for (std::size_t b = a + 1; b < ordered.size(); ++b) {
      EXPECT_TRUE(heavier_than(ordered[a], ordered[b])) << a << " vs " << b;
      EXPECT_FALSE(heavier_than(ordered[b], ordered[a])) << a << " vs " << b;
    }
  }
  EXPECT_TRUE(proportional(RegularlyVarying{0.5, 1.0}, RegularlyVarying{0.5, 7.0}));
  EXPECT_THROW(make_stretched_exponential(1.0, 1.0), DistributionError);
  EXPECT_THROW(make_regularly_varying(0.5, 0.0), DistributionError);
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  const auto s = RandomStream::split(42, 0);
  RandomStream a = RandomStream::for_stream(s, StreamId::Demands);
  RandomStream b = RandomStream::for_stream(s, StreamId::Demands);
  RandomStream c = RandomStream::for_stream(s, StreamId::Holding);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differ += x != c.uniform();
  }
  EXPECT_GT(differ, 95);
  EXPECT_NE(RandomStream::split(42, 0), RandomStream::split(42, 1));
}

TEST(FromPmf, RejectsBadMass) {
  EXPECT_THROW(DemandDistribution::from_pmf({0.5, 0.4}, Bounded{}), DistributionError);
  EXPECT_THROW(DemandDistribution::from_pmf({1.2, -0.2}, Bounded{}), DistributionError);
  EXPECT_THROW(DemandDistribution::from_pmf({}, Bounded{}), DistributionError);
}
