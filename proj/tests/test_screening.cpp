#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "factorial/errors.hpp"
#include "factorial/rng.hpp"
#include "factorial/screening.hpp"
#include "factorial/simulation.hpp"
#include "factorial/stats.hpp"
#include "oracle_utils.hpp"

using namespace factorial;

namespace {

// Shifted-exponential data on a uniform design with the given effects.
ArmTable simulated_arms(int K, std::int64_t n0,
                        const std::vector<std::pair<FactorSet, double>>& effects,
                        std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  const auto mu = mu_from_effects(effects, K);
  const DesignSpec design = uniform_design(K, n0);
  const ScienceTable science = gen_science_table(mu, design.total(), Dgp::shifted_exponential, rng);
  return summarize(reveal(science, assign(design, K, rng)));
}

bool heredity_holds(const ScreeningTrace& trace, Heredity mode) {
  const WorkingModel& model = trace.final_model;
  for (FactorSet s : model.sets()) {
    const int d = s.level();
    if (d < 2) continue;
    int present = 0, total = 0;
    for (int f : s.indices()) {
      FactorSet parent = s;
      parent.mask ^= std::uint32_t{1} << (f - 1);
      ++total;
      if (model.contains(parent)) ++present;
    }
    if (mode == Heredity::strong && present != total) return false;
    if (mode == Heredity::weak && present == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(normal_quantile(0.975) - 1.959963985) < 1e-8);

  SUBCASE("matches the bisection oracle") {
    for (double p : {1e-6, 1e-4, 0.01, 0.025, 0.2, 0.5, 0.7, 0.95, 0.99, 0.9999})
      CHECK(std::abs(normal_quantile(p) - oracle::quantile_bisect(p)) < 1e-9);
  }

  SUBCASE("is antisymmetric") {
    std::mt19937_64 rng = substream(201, 0);
    for (int trial = 0; trial < 200; ++trial) {
      const double p = 0.0001 + 0.9998 * uniform01(rng);
      CHECK(std::abs(normal_quantile(p) + normal_quantile(1.0 - p)) < 1e-10);
    }
  }

  SUBCASE("rejects boundary probabilities") {
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
  }
}

TEST_CASE("bonferroni t selection") {
  auto estimate = [](double tau, double se) {
    EffectEstimate e;
    e.set = FactorSet::of({1});
    e.tau_hat = tau;
    e.se = se;
    return e;
  };

  SUBCASE("an enormous t statistic is always kept") {
    const std::vector<EffectEstimate> c = {estimate(10.0, 1.0)};
    CHECK(bonferroni_t_select(c, 0.05, 5).size() == 1);
  }

  SUBCASE("a zero estimate is never kept") {
    const std::vector<EffectEstimate> c = {estimate(0.0, 1.0)};
    CHECK(bonferroni_t_select(c, 1.0, 1).empty());
  }

  SUBCASE("the boundary sits at the Bonferroni quantile") {
    // alpha=0.05, m=1: threshold = z_{0.975} = 1.959963985.
    const double z = oracle::quantile_bisect(0.975);
    const std::vector<EffectEstimate> above = {estimate(2.0, 1.0)};
    const std::vector<EffectEstimate> below = {estimate(z - 1e-3, 1.0)};
    CHECK(bonferroni_t_select(above, 0.05, 1).size() == 1);
    CHECK(bonferroni_t_select(below, 0.05, 1).empty());
    CHECK(2.0 >= z);
  }

  SUBCASE("zero variance follows the t rules") {
    const std::vector<EffectEstimate> spike = {estimate(0.3, 0.0)};
    const std::vector<EffectEstimate> flat = {estimate(0.0, 0.0)};
    CHECK(bonferroni_t_select(spike, 0.001, 10).size() == 1);
    CHECK(bonferroni_t_select(flat, 1.0, 1).empty());
  }

  SUBCASE("no candidates select nothing") {
    CHECK(bonferroni_t_select({}, 0.05, 0).empty());
  }
}

TEST_CASE("lasso selection") {
  auto estimate = [](FactorSet s, double tau) {
    EffectEstimate e;
    e.set = s;
    e.tau_hat = tau;
    e.se = 1.0;
    return e;
  };
  const std::vector<EffectEstimate> c = {estimate(FactorSet::of({1}), 0.3),
                                         estimate(FactorSet::of({2}), 0.1)};

  SUBCASE("threshold keeps the larger estimate only") {
    const auto kept = lasso_select(c, 0.2);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0] == FactorSet::of({1}));
  }

  SUBCASE("lambda zero keeps everything, boundary inclusive") {
    const std::vector<EffectEstimate> with_zero = {estimate(FactorSet::of({1}), 0.0)};
    CHECK(lasso_select(with_zero, 0.0).size() == 1);
  }

  SUBCASE("lambda above the largest estimate keeps nothing") {
    CHECK(lasso_select(c, 0.31).empty());
  }
}

TEST_CASE("forward screening on constant outcomes keeps only the intercept") {
  FactorialDataset data;
  data.K = 3;
  for (std::size_t r = 0; r < 8; ++r)
    for (int i = 0; i < 2; ++i) {
      data.z.push_back(treatment_from_row(r, 3));
      data.y.push_back(4.0);
    }
  ScreeningConfig config;
  config.max_level = 3;
  const ScreeningTrace trace = forward_screen(summarize(data), config);
  CHECK(trace.final_model == WorkingModel::intercept_only());
  // Dead branch: level 2/3 candidate lists stay empty under strong heredity.
  REQUIRE(trace.levels.size() == 3);
  CHECK(trace.levels[0].candidates.size() == 3);
  CHECK(trace.levels[1].candidates.empty());
  CHECK(trace.levels[2].candidates.empty());
}

TEST_CASE("forward screening recovers the reference structure most of the time") {
  const int K = 8;
  std::vector<std::pair<FactorSet, double>> effects;
  for (FactorSet s : first_five_effect_sets(K)) effects.emplace_back(s, 0.4);
  WorkingModel truth;
  for (auto& [s, v] : effects) truth.add(s);

  ScreeningConfig config;
  config.max_level = 3;
  config.heredity = Heredity::strong;

  int hits = 0;
  const int reps = 120;
  for (int rep = 0; rep < reps; ++rep) {
    const ArmTable arms = simulated_arms(K, 8, effects, 500 + rep);
    const ScreeningTrace trace = forward_screen(arms, config);
    if (trace.final_model == truth) ++hits;
  }
  // Theorem-style consistency check at a deterministic seed set.
  CHECK(hits >= static_cast<int>(0.9 * reps));
}

TEST_CASE("trace invariants on random data") {
  std::mt19937_64 rng = substream(202, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const int K = 3 + static_cast<int>(uniform_below(rng, 3));
    const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
    const ArmTable arms = summarize(data);
    ScreeningConfig config;
    config.max_level = std::min(K, 3);
    config.heredity = uniform01(rng) < 0.5 ? Heredity::weak : Heredity::strong;
    config.alphas = {0.2};
    const ScreeningTrace trace = forward_screen(arms, config);

    // Heredity soundness.
    CHECK(heredity_holds(trace, config.heredity));

    // Monotone growth: every selected set appears in the final model and the
    // candidate sets obey the expansion of the previous level.
    WorkingModel rebuilt;
    for (const LevelTrace& level : trace.levels) {
      const auto expanded =
          heredity_expand(rebuilt.level_slice(level.level - 1), level.level,
                          config.heredity, K);
      std::set<std::uint32_t> allowed;
      for (FactorSet s : expanded) allowed.insert(s.mask);
      CHECK(level.candidates.size() == allowed.size());
      for (const CandidateRecord& rec : level.candidates)
        CHECK(allowed.count(rec.set.mask) == 1);
      rebuilt.add_all(level.selected);
    }
    CHECK(rebuilt == trace.final_model);

    // Determinism.
    const ScreeningTrace again = forward_screen(arms, config);
    CHECK(again.final_model == trace.final_model);
    REQUIRE(again.levels.size() == trace.levels.size());
    for (std::size_t d = 0; d < trace.levels.size(); ++d)
      CHECK(again.levels[d].selected == trace.levels[d].selected);
  }
}

TEST_CASE("scaling outcomes leaves the t-test selection invariant") {
  std::mt19937_64 rng = substream(203, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 3;
    FactorialDataset data = oracle::random_dataset(K, 3, 2, rng);
    ScreeningConfig config;
    config.max_level = 2;
    config.alphas = {0.3};
    const ScreeningTrace base = forward_screen(summarize(data), config);

    const double c = 0.25 + 10.0 * uniform01(rng);
    FactorialDataset scaled = data;
    for (double& y : scaled.y) y *= c;
    const ScreeningTrace after = forward_screen(summarize(scaled), config);
    CHECK(after.final_model == base.final_model);

    // The lasso needs its threshold scaled along with the outcomes.
    ScreeningConfig lasso_config = config;
    lasso_config.s_step = SStep::lasso;
    lasso_config.lasso_lambda = 0.2;
    const ScreeningTrace lasso_base = forward_screen(summarize(data), lasso_config);
    lasso_config.lasso_lambda = 0.2 * c;
    const ScreeningTrace lasso_after = forward_screen(summarize(scaled), lasso_config);
    CHECK(lasso_after.final_model == lasso_base.final_model);
  }
}

TEST_CASE("strategies") {
  std::mt19937_64 rng = substream(204, 0);

  SUBCASE("over(1) appends the closure untested") {
    // Strong effects on factors 1 and 2 only.
    const std::vector<std::pair<FactorSet, double>> effects = {
        {FactorSet::of({1}), 2.0}, {FactorSet::of({2}), 2.0}};
    const ArmTable arms = simulated_arms(3, 8, effects, 42);
    ScreeningConfig config;
    config.max_level = 2;
    config.strategy = Strategy::over;
    config.pivot_level = 1;
    const ScreeningTrace trace = forward_screen(arms, config);
    if (trace.final_model.contains(FactorSet::of({1})) &&
        trace.final_model.contains(FactorSet::of({2}))) {
      CHECK(trace.final_model.contains(FactorSet::of({1, 2})));
      const LevelTrace& closure = trace.levels.back();
      CHECK(closure.level == 2);
      for (const CandidateRecord& rec : closure.candidates) {
        CHECK(!rec.tested);
        CHECK(rec.selected);
      }
    }
  }

  SUBCASE("under is a prefix of full; over agrees with under through d*") {
    for (int trial = 0; trial < 30; ++trial) {
      const int K = 4;
      const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
      const ArmTable arms = summarize(data);
      ScreeningConfig config;
      config.max_level = 3;
      config.alphas = {0.3};
      config.heredity = uniform01(rng) < 0.5 ? Heredity::weak : Heredity::strong;

      const ScreeningTrace full = forward_screen(arms, config);

      ScreeningConfig under = config;
      under.strategy = Strategy::under;
      under.pivot_level = 2;
      const ScreeningTrace under_trace = forward_screen(arms, under);

      ScreeningConfig over = config;
      over.strategy = Strategy::over;
      over.pivot_level = 2;
      const ScreeningTrace over_trace = forward_screen(arms, over);

      REQUIRE(under_trace.levels.size() == 2);
      for (std::size_t d = 0; d < 2; ++d) {
        CHECK(under_trace.levels[d].selected == full.levels[d].selected);
        CHECK(under_trace.levels[d].selected == over_trace.levels[d].selected);
      }

      // over = under + exact closure.
      WorkingModel expected = under_trace.final_model;
      auto slices = heredity_closure(under_trace.final_model.level_slice(2), 1,
                                     config.heredity, K);
      for (const auto& slice : slices) expected.add_all(slice);
      CHECK(over_trace.final_model == expected);
    }
  }
}

TEST_CASE("screening requires replication") {
  FactorialDataset data;
  data.K = 2;
  data.z = {treatment_from_row(0, 2), treatment_from_row(1, 2), treatment_from_row(2, 2)};
  data.y = {1.0, 2.0, 3.0};
  ScreeningConfig config;
  config.max_level = 1;
  CHECK_THROWS_AS(forward_screen(summarize(data), config), ReplicationError);
}

TEST_CASE("config validation") {
  ScreeningConfig config;
  config.max_level = 0;
  CHECK_THROWS_AS(config.validate(4), std::invalid_argument);
  config.max_level = 5;
  CHECK_THROWS_AS(config.validate(4), std::invalid_argument);
  config.max_level = 2;
  config.alphas = {0.05, 0.0};
  CHECK_THROWS_AS(config.validate(4), std::invalid_argument);
  config.alphas = {0.05};
  config.strategy = Strategy::under;
  config.pivot_level = 3;
  CHECK_THROWS_AS(config.validate(4), std::invalid_argument);
  config.pivot_level = 1;
  CHECK_NOTHROW(config.validate(4));
}
