#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lossnet/sweep.hpp"
#include "test_models.hpp"

using namespace lossnet;
using lossnet::testing::sim_config;

namespace {

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

ExperimentConfig parse(const std::string& text) { return parse_experiment(text); }

const char* kExample1 = R"({
  "model": {
    "arrival": {"family": "poisson", "rate": 1.0},
    "capacities": [500],
    "classes": [{"probability": 1.0,
                 "demands": [{"family": "truncated_power_law", "coef": 0.3, "exponent": 1.5, "cutoff": 2000}],
                 "holding": {"family": "exponential", "mean": 1.0}}]
  },
  "sweep": {"capacity_start": 500, "capacity_step": 100, "capacity_count": 10},
  "sim": {"warmup_arrivals": 1000, "measured_arrivals": 20000, "seed": 7, "replications": 2}
})";

const char* kMmcc = R"({
  "model": {
    "arrival": {"family": "poisson", "rate": 2.0},
    "capacities": [1],
    "classes": [{"probability": 1.0, "demands": [{"family": "deterministic", "value": 1}],
                 "holding": {"family": "exponential", "rate": 1.0}}]
  },
  "sweep": {"capacity_start": 1, "capacity_step": 1, "capacity_count": 6},
  "sim": {"warmup_arrivals": 2000, "measured_arrivals": 100000, "seed": 11, "replications": 8}
})";

}  // namespace

TEST(Config, ParsesExampleOne) {
  const auto cfg = parse(kExample1);
  EXPECT_EQ(cfg.model.capacities, std::vector<std::int64_t>{500});
  EXPECT_EQ(cfg.sweep.capacity_start, 500);
  EXPECT_EQ(cfg.sim.measured_arrivals, 20000u);
  EXPECT_NEAR(cfg.model.classes[0].demands[0].mean(), 485.8, 0.5);
  EXPECT_EQ(cfg.outputs.csv_path, "sweep.csv");
}

TEST(Config, DefaultsAreDeskScale) {
  const auto cfg = parse(R"({"model": {"arrival": {"family": "poisson", "rate": 1},
    "capacities": [3], "classes": [{"probability": 1, "demands": [{"family": "deterministic", "value": 1}],
    "holding": {"family": "deterministic", "value": 1}}]}})");
  EXPECT_EQ(cfg.sim.warmup_arrivals, 100'000u);
  EXPECT_EQ(cfg.sim.measured_arrivals, 10'000'000u);
  EXPECT_EQ(cfg.sim.replications, 4u);
  EXPECT_EQ(cfg.sweep.capacity_start, 3);
  EXPECT_EQ(cfg.sweep.capacity_count, 1);
}

TEST(Config, ErrorsCarryPaths) {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse(text);
      ADD_FAILURE() << "no error for " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(R"({"model": {"arrival": {"family": "poisson"}}})", "model.arrival.rate");
  expect_error(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [3],
    "classes": [{"probability": 1, "demands": [{"family": "zipf"}], "holding": {"family": "deterministic", "value": 1}}]}})",
               "model.classes[0].demands[0].family");
  expect_error(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [3],
    "classes": [{"probability": 0.4, "demands": [{"family": "deterministic", "value": 1}],
    "holding": {"family": "deterministic", "value": 1}}]}})",
               "class probabilities sum to 0.4");
  expect_error(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [3],
    "classes": [{"probability": 1, "demands": [{"family": "truncated_power_law", "coef": 0.9, "exponent": 1.5, "cutoff": 100}],
    "holding": {"family": "deterministic", "value": 1}}]}})",
               "negative remainder");
  expect_error("{\n  \"model\": [1,\n  }", "3:");
  expect_error(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [3],
    "classes": [{"probability": 1, "demands": [{"family": "deterministic", "value": 1}],
    "holding": {"family": "deterministic", "value": 1}}]}, "sweep": {"capacity_count": 0}})",
               "sweep.capacity_count");
  expect_error(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [3],
    "classes": [{"probability": 1, "demands": [{"family": "deterministic", "value": 1}],
    "holding": {"family": "deterministic", "value": 1}}]}, "outputs": {"csv_path": 5}})",
               "$:");
}

TEST(Config, ExactInstanceSection) {
  const auto cfg = parse(R"({"model": {"arrival": {"family": "poisson", "rate": 1}, "capacities": [2],
    "classes": [{"probability": 1, "demands": [{"family": "deterministic", "value": 1}],
    "holding": {"family": "deterministic", "value": 1}}]},
    "exact": {"demand_matrix": [[1, 2]], "capacities": [2], "intensities": [1, 1], "enumeration_limit": 50}})");
  ASSERT_TRUE(cfg.exact_instance.has_value());
  EXPECT_EQ(cfg.enumeration_limit, 50u);
  EXPECT_EQ(cfg.exact_instance->demand_matrix[0][1], 2);
}

TEST(Sweep, AutoStartIsLoadCeilingPlusStep) {
  ExperimentConfig cfg;
  cfg.model = lossnet::testing::example2_model(500);
  cfg.sweep.capacity_start.reset();
  cfg.sweep.capacity_step = 100;
  EXPECT_EQ(resolve_sweep_start(cfg), 6862 + 100);
}

TEST(Sweep, ExampleOneHasTenRows) {
  const auto cfg = parse(kExample1);
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    EXPECT_EQ(rows[j].capacity, 500 + 100 * static_cast<std::int64_t>(j));
    EXPECT_EQ(rows[j].p_asym, cfg.model.classes[0].demands[0].tail(rows[j].capacity));
    EXPECT_FALSE(rows[j].p_exact.has_value());
    ASSERT_TRUE(rows[j].log10_sim.has_value());
    EXPECT_DOUBLE_EQ(*rows[j].log10_sim, std::log10(rows[j].p_sim));
  }
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(count_lines(csv), 11u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "capacity,p_sim,std_err,p_asym,p_exact,log10_sim,log10_asym");
}

TEST(Sweep, SingleDeterministicRowIsReproducible) {
  auto cfg = parse(kMmcc);
  cfg.sweep.capacity_count = 1;
  cfg.model.classes[0].holding = Deterministic{0.75};
  const auto a = sweep_csv(run_sweep(cfg));
  const auto b = sweep_csv(run_sweep(cfg, 1));
  EXPECT_EQ(a, b);
  EXPECT_EQ(count_lines(a), 2u);
}

TEST(Sweep, ErlangRowsCarryExactColumn) {
  const auto cfg = parse(kMmcc);
  const auto rows = run_sweep(cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.p_exact.has_value());
    EXPECT_NEAR(*r.p_exact, erlang_b(2.0, r.capacity), 1e-12);
    EXPECT_NEAR(r.p_sim, *r.p_exact, 3.0 * r.std_err) << "C=" << r.capacity;
    // Unit demands are Bounded: no subexponential tail, so the asymptote is 0.
    EXPECT_EQ(r.p_asym, 0.0);
    EXPECT_FALSE(r.log10_asym.has_value());
  }
  const std::string csv = sweep_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.back(), ',') << line;  // empty log10_asym
}

// Statistical acceptance over a randomized battery of product-form models.
TEST(Sweep, SimulationMatchesExactOnRandomBattery) {
  std::mt19937_64 gen(4242);
  int rows = 0;
  int covered = 0;
  for (int trial = 0; trial < 12; ++trial) {
    ExperimentConfig cfg;
    const std::size_t pools = 1 + gen() % 2;
    const std::size_t classes = 1 + gen() % 3;
    cfg.model.arrival = PoissonArrivals{0.5 + static_cast<double>(gen() % 30) / 10.0};
    cfg.model.capacities.assign(pools, 1);
    for (std::size_t l = 0; l < classes; ++l) {
      RequestClass c;
      c.probability = 1.0 / static_cast<double>(classes);
      for (std::size_t i = 0; i < pools; ++i) {
        c.demands.push_back(build_deterministic_demand(static_cast<std::int64_t>(gen() % 4)));
      }
      c.holding = (gen() % 2) ? HoldingDistribution{Exponential{1.0}} : HoldingDistribution{UniformContinuous{0.0, 2.0}};
      cfg.model.classes.push_back(c);
    }
    cfg.model.classes.back().probability = 1.0 - (classes - 1) * (1.0 / static_cast<double>(classes));
    cfg.model.classes.front().demands.front() = build_deterministic_demand(1);
    cfg.sweep.capacity_start = 2;
    cfg.sweep.capacity_step = 2;
    cfg.sweep.capacity_count = 3;
    cfg.sim = sim_config(2'000, 30'000, 10, 1000 + static_cast<std::uint64_t>(trial));
    for (const auto& r : run_sweep(cfg)) {
      ASSERT_TRUE(r.p_exact.has_value());
      ++rows;
      covered += std::abs(r.p_sim - *r.p_exact) <= 3.0 * r.std_err;
    }
  }
  EXPECT_GE(covered, static_cast<int>(std::ceil(0.95 * rows))) << covered << "/" << rows;
}

TEST(Sweep, PlotDataHasOneBlockPerCurve) {
  std::vector<SweepRow> rows(2);
  rows[0] = {500, 0.25, 0.01, 0.2431, std::nullopt, std::log10(0.25), std::log10(0.2431)};
  rows[1] = {600, 0.0, 0.0, 0.0, std::nullopt, std::nullopt, std::nullopt};
  const auto text = sweep_plot_data(rows);
  EXPECT_NE(text.find("# curve: simulation\n# capacity log10_p\n500 -0.602059991328\n"), std::string::npos) << text;
  EXPECT_NE(text.find("\n\n\n# curve: asymptote"), std::string::npos);
  EXPECT_EQ(text.find("600 "), std::string::npos);
  EXPECT_EQ(text.find("exact"), std::string::npos);
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(3.0 / 7.0), "0.428571428571");
  EXPECT_EQ(format_number(2.5e-7), "2.5e-07");
  EXPECT_EQ(format_number(0.0), "0");
}
