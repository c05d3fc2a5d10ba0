#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "factorial/best_arm.hpp"
#include "factorial/rng.hpp"
#include "factorial/simulation.hpp"
#include "oracle_utils.hpp"

using namespace factorial;

TEST_CASE("canonical weights") {
  SUBCASE("K=3, K0=1 selects the four low arms in row order") {
    const auto weights = canonical_weights(3, 1);
    REQUIRE(weights.size() == 4);
    std::vector<std::string> arms;
    for (const WeightVector& f : weights)
      for (std::size_t r = 0; r < f.values.size(); ++r)
        if (f.values[r] != 0.0) arms.push_back(arm_string(treatment_from_row(r, 3), 3));
    CHECK(arms == std::vector<std::string>{"000", "001", "010", "100"});
  }

  SUBCASE("K0=K covers every arm") {
    CHECK(canonical_weights(3, 3).size() == 8);
  }

  SUBCASE("K=8, K0=2 yields 1+8+28 vectors") {
    CHECK(canonical_weights(8, 2).size() == 37);
  }

  SUBCASE("invalid constraints throw") {
    CHECK_THROWS_AS(canonical_weights(3, 4), std::invalid_argument);
    CHECK_THROWS_AS(canonical_weights(3, -1), std::invalid_argument);
  }
}

TEST_CASE("tie set") {
  const std::vector<double> gammas = {1.0, 0.98, 0.5};
  CHECK(tie_set(gammas, 0.05) == std::vector<std::size_t>{0, 1});
  CHECK(tie_set(gammas, 0.0) == std::vector<std::size_t>{0});
  const std::vector<double> equal = {2.0, 2.0, 2.0};
  CHECK(tie_set(equal, 0.0) == std::vector<std::size_t>{0, 1, 2});
  // Boundary is inclusive (dyadic values keep the difference exact).
  const std::vector<double> boundary = {1.0, 0.75};
  CHECK(tie_set(boundary, 0.25) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("default eta") {
  SUBCASE("single candidate uses the plain two-sided width") {
    const double eta = default_eta(std::vector<double>{1.0}, std::vector<double>{0.5});
    CHECK(std::abs(eta - 2.0 * oracle::quantile_bisect(0.975) * 0.5) < 1e-8);
  }
  SUBCASE("two candidates use the Bonferroni quantile and the largest se") {
    const double eta = default_eta(std::vector<double>{1.0, 0.0},
                                   std::vector<double>{1.0, 2.0});
    CHECK(std::abs(eta - 2.0 * oracle::quantile_bisect(1.0 - 0.05 / 4.0) * 2.0) < 1e-8);
  }
  SUBCASE("all-zero ses collapse to exact ties") {
    CHECK(default_eta(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0}) == 0.0);
  }
}

namespace {

ArmTable two_group_arms(int K, std::int64_t n0, double high_popcount_cap,
                        double noise_scale, std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  const std::size_t Q = std::size_t{1} << K;
  std::vector<double> mu(Q, 0.0);
  for (std::size_t r = 0; r < Q; ++r)
    if (treatment_from_row(r, K).active_count() <= high_popcount_cap) mu[r] = 1.0;
  const DesignSpec design = uniform_design(K, n0);
  std::vector<double> outcomes;
  outcomes.reserve(static_cast<std::size_t>(design.total()) * Q);
  for (std::int64_t i = 0; i < design.total(); ++i)
    for (std::size_t r = 0; r < Q; ++r)
      outcomes.push_back(mu[r] + noise_scale * (exponential1(rng) - 1.0));
  const ScienceTable science(K, design.total(), std::move(outcomes));
  return summarize(reveal(science, assign(design, K, rng)));
}

}  // namespace

TEST_CASE("best arm estimation") {
  SUBCASE("saturated model recovers raw arm means") {
    std::mt19937_64 rng = substream(301, 0);
    const int K = 3;
    const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
    const ArmTable arms = summarize(data);
    BestArmConfig config;
    config.constraint_k0 = K;
    config.eta = 0.0;
    const TieReport report = best_arm_estimate(arms, WorkingModel::saturated(K), config);
    REQUIRE(report.gamma_hats.size() == 8);
    for (std::size_t r = 0; r < 8; ++r)
      CHECK(report.gamma_hats[r] == doctest::Approx(arms.at(r).mean));
  }

  SUBCASE("a single best index reduces to its own RLS estimate") {
    std::mt19937_64 rng = substream(302, 0);
    const int K = 3;
    const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
    const ArmTable arms = summarize(data);
    const WorkingModel model = WorkingModel::saturated(K);
    BestArmConfig config;
    config.constraint_k0 = K;
    config.eta = 0.0;
    const TieReport report = best_arm_estimate(arms, model, config);
    REQUIRE(report.tie_indices.size() == 1);
    const std::size_t best = report.tie_indices[0];
    const auto single = rls_estimate(
        WeightVector::arm(K, treatment_from_row(best, K)), model, arms);
    CHECK(report.best.gamma_hat == doctest::Approx(single.gamma_hat));
    CHECK(report.best.variance == doctest::Approx(single.variance));
  }

  SUBCASE("the tie average equals the mean of tied estimates") {
    std::mt19937_64 rng = substream(303, 0);
    const int K = 4;
    const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
    const ArmTable arms = summarize(data);
    BestArmConfig config;
    config.constraint_k0 = 2;
    config.eta = 0.5;
    const TieReport report = best_arm_estimate(arms, WorkingModel::saturated(K), config);
    double mean = 0.0;
    for (std::size_t l : report.tie_indices) mean += report.gamma_hats[l];
    mean /= static_cast<double>(report.tie_indices.size());
    CHECK(std::abs(report.best.gamma_hat - mean) < 1e-12);
  }

  SUBCASE("permuting explicit weights permutes the ties") {
    std::mt19937_64 rng = substream(304, 0);
    const int K = 3;
    const FactorialDataset data = oracle::random_dataset(K, 2, 2, rng);
    const ArmTable arms = summarize(data);
    BestArmConfig config;
    for (std::size_t r = 0; r < 4; ++r)
      config.weights.push_back(WeightVector::arm(K, treatment_from_row(r, K)));
    config.eta = 0.3;
    const TieReport base = best_arm_estimate(arms, WorkingModel::saturated(K), config);

    BestArmConfig reversed = config;
    std::reverse(reversed.weights.begin(), reversed.weights.end());
    const TieReport flipped = best_arm_estimate(arms, WorkingModel::saturated(K), reversed);
    CHECK(flipped.best.gamma_hat == doctest::Approx(base.best.gamma_hat));
    CHECK(flipped.best.variance == doctest::Approx(base.best.variance));
    std::vector<std::size_t> mapped;
    for (std::size_t l : flipped.tie_indices) mapped.push_back(3 - l);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == base.tie_indices);
  }

  SUBCASE("adding a clearly inferior candidate changes nothing") {
    std::mt19937_64 rng = substream(305, 0);
    const int K = 3;
    FactorialDataset data = oracle::random_dataset(K, 3, 2, rng);
    for (double& y : data.y) y += 1.0;
    const ArmTable arms = summarize(data);
    BestArmConfig config;
    for (std::size_t r = 0; r < 3; ++r)
      config.weights.push_back(WeightVector::arm(K, treatment_from_row(r, K)));
    config.eta = 0.25;
    const WorkingModel model = WorkingModel::saturated(K);
    const TieReport base = best_arm_estimate(arms, model, config);

    BestArmConfig more = config;
    WeightVector poor = WeightVector::zeros(K);
    poor.values[7] = 1e-3;  // gamma far below the running maximum
    more.weights.push_back(poor);
    const TieReport extended = best_arm_estimate(arms, model, more);
    CHECK(extended.tie_indices == base.tie_indices);
    CHECK(extended.best.gamma_hat == doctest::Approx(base.best.gamma_hat));
    CHECK(extended.best.variance == doctest::Approx(base.best.variance));
  }

  SUBCASE("two groups with gap far above noise are separated") {
    const int K = 4;
    int correct = 0;
    const int reps = 60;
    for (int rep = 0; rep < reps; ++rep) {
      // Arms with at most one active factor sit at 1, the rest at 0; noise
      // sd 0.05 makes the gap enormous.
      const ArmTable arms = two_group_arms(K, 8, 1.0, 0.05, 400 + rep);
      BestArmConfig config;
      config.constraint_k0 = K;  // candidates span both groups
      const TieReport report = best_arm_estimate(arms, WorkingModel::saturated(K), config);
      std::vector<std::size_t> expected;
      for (std::size_t r = 0; r < arms.arm_count(); ++r)
        if (treatment_from_row(r, K).active_count() <= 1) expected.push_back(r);
      if (report.tie_indices == expected) ++correct;
    }
    CHECK(correct >= static_cast<int>(0.95 * reps));
  }
}
