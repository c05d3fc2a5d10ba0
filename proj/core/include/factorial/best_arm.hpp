#ifndef FACTORIAL_BEST_ARM_HPP
#define FACTORIAL_BEST_ARM_HPP

// Inference on the best of several weighted causal effects: RLS estimates of
// every candidate, identification of the tie set around the maximum, and the
// tie-averaged estimate that mitigates winner's-curse bias.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factorial/estimation.hpp"

namespace factorial {

struct BestArmConfig {
  // Candidate parameters: explicit weight vectors, or canonical arm weights
  // generated from the constraint "at most K0 active factors".
  std::vector<WeightVector> weights;
  std::optional<int> constraint_k0;

  // Tie threshold; unset means the Bonferroni-width default rule.
  std::optional<double> eta;
  double alpha_ci = 0.05;
};

struct TieReport {
  std::vector<std::string> labels;    // per candidate
  std::vector<double> gamma_hats;     // RLS estimates, per candidate
  std::vector<double> ses;            // per-candidate RLS standard errors
  std::vector<std::size_t> tie_indices;  // ascending; nonempty
  double eta = 0.0;                   // threshold actually used
  GammaEstimate best;                 // tie-averaged Y_(1) with Wald CI
};

// One canonical basis weight e(z) per arm with at most K0 active factors,
// ordered by row index.
std::vector<WeightVector> canonical_weights(int K, int K0);

// Indices within eta of the maximum (inclusive boundary).
std::vector<std::size_t> tie_set(std::span<const double> gamma_hats, double eta);

// Default threshold 2 * z(1 - 0.05/(2L)) * max_l se_l. A Bonferroni-width
// heuristic standing in for an external tuning procedure.
double default_eta(std::span<const double> gamma_hats, std::span<const double> ses);

// Full procedure: RLS estimates for every candidate under `model`, tie set
// around the maximum, and the tie-averaged estimate with its Wald interval.
TieReport best_arm_estimate(const ArmTable& arms, const WorkingModel& model,
                            const BestArmConfig& config);

}  // namespace factorial

#endif
