#ifndef FACTORIAL_SIMULATION_HPP
#define FACTORIAL_SIMULATION_HPP

// Science-table generation, completely randomized assignment, exact
// enumeration oracles for tiny designs, and the Monte Carlo harness.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factorial/dataset.hpp"
#include "factorial/design.hpp"
#include "factorial/estimation.hpp"
#include "factorial/screening.hpp"

namespace factorial {

// The full N x Q matrix of potential outcomes; observable only in simulation.
class ScienceTable {
 public:
  ScienceTable(int K, std::int64_t N, std::vector<double> outcomes);

  int factor_count() const { return K_; }
  std::int64_t unit_count() const { return N_; }
  std::size_t arm_count() const { return std::size_t{1} << K_; }

  double outcome(std::int64_t unit, std::size_t row) const {
    return outcomes_[static_cast<std::size_t>(unit) * arm_count() + row];
  }

  std::vector<double> column_means() const;  // Ybar
  std::vector<double> covariance() const;    // S, Q x Q row-major, divisor N-1
  std::vector<double> true_effects() const;  // tau over all subsets
  double weighted_mean(const WeightVector& f) const;  // gamma = f' Ybar

 private:
  int K_;
  std::int64_t N_;
  std::vector<double> outcomes_;  // unit-major
};

// Per-arm unit counts of a completely randomized design.
struct DesignSpec {
  std::vector<std::int64_t> counts;  // indexed by r(z)
  std::uint64_t seed = 0;

  std::int64_t total() const;
};

DesignSpec uniform_design(int K, std::int64_t per_arm);

enum class Dgp {
  shifted_exponential,  // Y_i(z) = mu(z) + EXP(1) - 1, independent across i and z
  constant,             // Y_i(z) = mu(z)
  sharp_exponential,    // one EXP(1) - 1 draw per unit shared by all arms
};

// mu = G tau for the given sparse effect map (zeros elsewhere).
std::vector<double> mu_from_effects(std::span<const std::pair<FactorSet, double>> effects,
                                    int K);

ScienceTable gen_science_table(std::span<const double> mu, std::int64_t N, Dgp dgp,
                               std::mt19937_64& rng);

// Uniformly random permutation of the multiset of arm labels with the exact
// prespecified counts.
std::vector<TreatmentLevel> assign(const DesignSpec& design, int K, std::mt19937_64& rng);

// Observed dataset Y_i = Y_i(Z_i).
FactorialDataset reveal(const ScienceTable& science, std::span<const TreatmentLevel> z);

// Exact expectations over every distinct assignment of a small design.
struct EnumerationOracle {
  std::uint64_t assignment_count = 0;
  std::vector<double> mean_arm_means;        // E[Yhat], length Q
  std::vector<double> cov_arm_means;         // Var(Yhat), Q x Q row-major
  std::vector<double> mean_vhat_diag;        // E[Vhat], length Q
  std::vector<std::vector<double>> mean_effects;  // E[tau_hat(M)] per model
};

inline constexpr std::uint64_t kMaxEnumeratedAssignments = 1000000;

// Throws std::invalid_argument when the multinomial count exceeds the cap.
EnumerationOracle enumerate_assignments(const ScienceTable& science,
                                        const DesignSpec& design,
                                        std::span<const WorkingModel> models = {});

enum class ScreenMethod {
  forward_bonferroni,
  forward_lasso,
  naive_bonferroni,
  naive_lasso,
};

std::string to_string(ScreenMethod method);
ScreenMethod screen_method_from_string(const std::string& name);

// Single saturated pass testing all Q-1 effects with Bonferroni divisor Q-1
// (or one global lasso threshold).
WorkingModel naive_screen(const ArmTable& arms, SStep s_step, double alpha,
                          std::optional<double> lambda = std::nullopt);

struct GridPoint {
  std::int64_t n0 = 2;
  double effect_size = 0.2;
};

struct SimulationConfig {
  int K = 8;
  std::vector<GridPoint> grid = {{2, 0.2}, {4, 0.2}, {6, 0.2}, {8, 0.2},
                                 {4, 0.1}, {4, 0.4}, {4, 0.8}};
  // Sets whose effects equal the grid point's effect size; everything else 0.
  std::vector<FactorSet> effect_sets;
  double intercept = 0.0;
  Dgp dgp = Dgp::shifted_exponential;
  int replications = 1000;
  std::uint64_t seed = 1;
  ScreeningConfig screening;
  std::vector<ScreenMethod> methods = {
      ScreenMethod::forward_bonferroni, ScreenMethod::forward_lasso,
      ScreenMethod::naive_bonferroni, ScreenMethod::naive_lasso};
  // Target weighting vector; defaults to e(last arm) when unset.
  std::optional<WeightVector> target;
  double alpha_ci = 0.05;
  int threads = 0;  // 0 = hardware concurrency
};

// Nonzero sets of the reference data-generating process: main effects of
// factors 1..5 and every two-way interaction within them (truncated to K).
std::vector<FactorSet> first_five_effect_sets(int K);

struct MetricRow {
  GridPoint point;
  std::string method;
  std::string estimator;  // "plugin", "rls" or "-" for model-level metrics
  std::string metric;
  double value = 0.0;
  double mc_se = 0.0;
};

struct MetricsTable {
  std::vector<MetricRow> rows;

  const MetricRow* find(const GridPoint& point, const std::string& method,
                        const std::string& estimator, const std::string& metric) const;
};

// Runs the replications for every grid point and method. Replicates execute
// concurrently on substreams; results are identical to a sequential run.
MetricsTable run_monte_carlo(const SimulationConfig& config);

}  // namespace factorial

#endif
