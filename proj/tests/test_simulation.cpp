#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "factorial/rng.hpp"
#include "factorial/simulation.hpp"
#include "oracle_utils.hpp"

using namespace factorial;

TEST_CASE("mu from effects") {
  SUBCASE("pure intercept gives a constant mean vector") {
    const std::vector<std::pair<FactorSet, double>> effects = {{FactorSet{}, 1.0}};
    const auto mu = mu_from_effects(effects, 2);
    for (double m : mu) CHECK(m == doctest::Approx(1.0));
  }

  SUBCASE("single main effect reproduces the contrast column") {
    const std::vector<std::pair<FactorSet, double>> effects = {{FactorSet::of({1}), 1.0}};
    const auto mu = mu_from_effects(effects, 1);
    CHECK(mu[0] == doctest::Approx(-1.0));
    CHECK(mu[1] == doctest::Approx(1.0));
  }

  SUBCASE("round trip through the dense oracle") {
    std::mt19937_64 rng = substream(401, 0);
    for (int K = 1; K <= 8; ++K) {
      std::vector<std::pair<FactorSet, double>> effects;
      for (FactorSet s : all_subsets(K))
        if (uniform01(rng) < 0.3) effects.emplace_back(s, 2.0 * uniform01(rng) - 1.0);
      const auto mu = mu_from_effects(effects, K);
      const auto tau = oracle::dense_effect_transform(mu, K);
      std::size_t pos = 0;
      for (FactorSet s : all_subsets(K)) {
        double expected = 0.0;
        for (const auto& [set, value] : effects)
          if (set == s) expected += value;
        CHECK(std::abs(tau[pos++] - expected) < 1e-12);
      }
    }
  }
}

TEST_CASE("science table generation") {
  const std::vector<double> mu = {0.0, 1.0, -1.0, 2.0};

  SUBCASE("constant DGP copies the mean vector") {
    std::mt19937_64 rng = substream(402, 0);
    const ScienceTable t = gen_science_table(mu, 5, Dgp::constant, rng);
    for (std::int64_t i = 0; i < 5; ++i)
      for (std::size_t r = 0; r < 4; ++r) CHECK(t.outcome(i, r) == mu[r]);
  }

  SUBCASE("same seed gives identical tables") {
    std::mt19937_64 a = substream(403, 7);
    std::mt19937_64 b = substream(403, 7);
    const ScienceTable ta = gen_science_table(mu, 20, Dgp::shifted_exponential, a);
    const ScienceTable tb = gen_science_table(mu, 20, Dgp::shifted_exponential, b);
    for (std::int64_t i = 0; i < 20; ++i)
      for (std::size_t r = 0; r < 4; ++r) CHECK(ta.outcome(i, r) == tb.outcome(i, r));
  }

  SUBCASE("column means converge to mu") {
    std::mt19937_64 rng = substream(404, 0);
    const ScienceTable t = gen_science_table(mu, 10000, Dgp::shifted_exponential, rng);
    const auto means = t.column_means();
    for (std::size_t r = 0; r < 4; ++r) CHECK(std::abs(means[r] - mu[r]) < 0.05);
  }

  SUBCASE("sharp null shares one noise draw across arms") {
    std::mt19937_64 rng = substream(405, 0);
    const std::vector<double> flat(8, 0.0);
    const ScienceTable t = gen_science_table(flat, 10, Dgp::sharp_exponential, rng);
    for (std::int64_t i = 0; i < 10; ++i)
      for (std::size_t r = 1; r < 8; ++r)
        CHECK(t.outcome(i, r) == t.outcome(i, 0));
  }
}

TEST_CASE("assignment") {
  SUBCASE("single-arm design is constant") {
    std::mt19937_64 rng = substream(406, 0);
    DesignSpec d;
    d.counts = {3, 0};
    const auto z = assign(d, 1, rng);
    REQUIRE(z.size() == 3);
    for (TreatmentLevel t : z) CHECK(t.bits == 0);
  }

  SUBCASE("counts are exact") {
    std::mt19937_64 rng = substream(407, 0);
    const DesignSpec d = uniform_design(2, 2);
    for (int rep = 0; rep < 50; ++rep) {
      const auto z = assign(d, 2, rng);
      std::map<std::uint32_t, int> counts;
      for (TreatmentLevel t : z) counts[t.bits]++;
      CHECK(counts.size() == 4);
      for (auto& [bits, n] : counts) CHECK(n == 2);
    }
  }

  SUBCASE("unit 1 lands in each arm proportionally to its count") {
    std::mt19937_64 rng = substream(408, 0);
    DesignSpec d;
    d.counts = {4, 2, 1, 1};
    std::map<std::uint32_t, int> first;
    const int reps = 100000;
    for (int rep = 0; rep < reps; ++rep) {
      const auto z = assign(d, 2, rng);
      first[z[0].bits]++;
    }
    for (std::size_t r = 0; r < 4; ++r) {
      const double expected = static_cast<double>(d.counts[r]) / 8.0;
      const double observed =
          static_cast<double>(first[treatment_from_row(r, 2).bits]) / reps;
      CHECK(std::abs(observed - expected) < 0.01);
    }
  }

  SUBCASE("mismatched counts are rejected") {
    std::mt19937_64 rng = substream(409, 0);
    DesignSpec d;
    d.counts = {1, 2, 3};  // not 2^K entries
    CHECK_THROWS_AS(assign(d, 2, rng), std::invalid_argument);
  }
}

TEST_CASE("reveal exposes exactly the assigned potential outcome") {
  std::mt19937_64 rng = substream(410, 0);
  const std::vector<double> mu = {1.0, 2.0, 3.0, 4.0};
  const ScienceTable t = gen_science_table(mu, 8, Dgp::shifted_exponential, rng);
  const DesignSpec d = uniform_design(2, 2);
  const auto z = assign(d, 2, rng);
  const FactorialDataset data = reveal(t, z);
  REQUIRE(data.unit_count() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(data.y[i] == t.outcome(static_cast<std::int64_t>(i), row_index(z[i], 2)));

  SUBCASE("constant table reveals equal outcomes per arm") {
    std::mt19937_64 rng2 = substream(411, 0);
    const ScienceTable ct = gen_science_table(mu, 4, Dgp::constant, rng2);
    const auto z2 = assign(uniform_design(2, 1), 2, rng2);
    const FactorialDataset d2 = reveal(ct, z2);
    for (std::size_t i = 0; i < 4; ++i) CHECK(d2.y[i] == mu[row_index(z2[i], 2)]);
  }

  SUBCASE("dimension mismatch throws") {
    std::vector<TreatmentLevel> bad(3);
    CHECK_THROWS_AS(reveal(t, bad), std::invalid_argument);
  }
}

TEST_CASE("enumeration oracle") {
  SUBCASE("constant tables have zero randomization variance") {
    std::mt19937_64 rng = substream(412, 0);
    const std::vector<double> mu = {1.0, 2.0, 3.0, 4.0};
    const ScienceTable t = gen_science_table(mu, 8, Dgp::constant, rng);
    const auto oracle_result = enumerate_assignments(t, uniform_design(2, 2));
    CHECK(oracle_result.assignment_count == 2520);
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(oracle_result.mean_arm_means[r] == doctest::Approx(mu[r]));
      for (std::size_t c = 0; c < 4; ++c)
        CHECK(std::abs(oracle_result.cov_arm_means[r * 4 + c]) < 1e-12);
    }
  }

  SUBCASE("oversized instances are rejected") {
    std::mt19937_64 rng = substream(413, 0);
    const std::vector<double> mu(16, 0.0);
    const ScienceTable t = gen_science_table(mu, 64, Dgp::shifted_exponential, rng);
    CHECK_THROWS_AS(enumerate_assignments(t, uniform_design(4, 4)), std::invalid_argument);
  }
}

TEST_CASE("monte carlo harness") {
  SUBCASE("smoke run emits one row per metric") {
    SimulationConfig config;
    config.K = 3;
    config.grid = {{2, 0.3}};
    config.effect_sets = {FactorSet::of({1})};
    config.replications = 1;
    config.seed = 7;
    config.screening.max_level = 2;
    const MetricsTable table = run_monte_carlo(config);
    // 4 methods x (1 screening metric + 2 estimators x 4 metrics), plus a
    // heredity audit row for each of the two forward methods.
    CHECK(table.rows.size() == 4 * 9 + 2);
    CHECK(table.find({2, 0.3}, "forward_bonferroni", "-", "perfect_screening") != nullptr);
    CHECK(table.find({2, 0.3}, "forward_lasso", "-", "heredity_violations") != nullptr);
    CHECK(table.find({2, 0.3}, "naive_lasso", "plugin", "coverage") != nullptr);
  }

  SUBCASE("same seed reproduces every metric; parallel equals sequential") {
    SimulationConfig config;
    config.K = 4;
    config.grid = {{2, 0.4}, {3, 0.2}};
    config.effect_sets = first_five_effect_sets(4);
    config.replications = 40;
    config.seed = 99;
    config.screening.max_level = 2;
    config.threads = 1;
    const MetricsTable sequential = run_monte_carlo(config);
    config.threads = 4;
    const MetricsTable parallel = run_monte_carlo(config);
    REQUIRE(sequential.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < sequential.rows.size(); ++i) {
      CHECK(sequential.rows[i].metric == parallel.rows[i].metric);
      CHECK(sequential.rows[i].value == parallel.rows[i].value);
      CHECK(sequential.rows[i].mc_se == parallel.rows[i].mc_se);
    }
  }

  SUBCASE("per-arm replication below two is rejected") {
    SimulationConfig config;
    config.K = 2;
    config.grid = {{1, 0.2}};
    config.replications = 1;
    CHECK_THROWS_AS(run_monte_carlo(config), std::invalid_argument);
  }

  SUBCASE("screening probability rises with replication under the reference DGP") {
    SimulationConfig config;
    config.K = 5;
    config.grid = {{2, 0.25}, {8, 0.25}};
    config.effect_sets = first_five_effect_sets(5);
    config.replications = 120;
    config.seed = 11;
    config.screening.max_level = 2;
    config.methods = {ScreenMethod::forward_bonferroni};
    const MetricsTable table = run_monte_carlo(config);
    const auto* low = table.find({2, 0.25}, "forward_bonferroni", "-", "perfect_screening");
    const auto* high = table.find({8, 0.25}, "forward_bonferroni", "-", "perfect_screening");
    REQUIRE(low != nullptr);
    REQUIRE(high != nullptr);
    const double slack = 2.0 * std::sqrt(low->mc_se * low->mc_se + high->mc_se * high->mc_se);
    CHECK(high->value >= low->value - slack);
  }

  SUBCASE("sharp-null uniform design: rls variance below plug-in variance") {
    SimulationConfig config;
    config.K = 4;
    config.grid = {{4, 0.0}};
    config.effect_sets = {};
    config.dgp = Dgp::sharp_exponential;
    config.replications = 150;
    config.seed = 21;
    config.screening.max_level = 2;
    config.methods = {ScreenMethod::forward_bonferroni};
    const MetricsTable table = run_monte_carlo(config);
    const auto* rls = table.find({4, 0.0}, "forward_bonferroni", "rls", "variance");
    const auto* plugin = table.find({4, 0.0}, "forward_bonferroni", "plugin", "variance");
    REQUIRE(rls != nullptr);
    REQUIRE(plugin != nullptr);
    CHECK(rls->value <= plugin->value);
  }
}
