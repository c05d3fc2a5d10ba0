#include "factorial/best_arm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "factorial/errors.hpp"
#include "factorial/stats.hpp"

namespace factorial {

std::vector<WeightVector> canonical_weights(int K, int K0) {
  if (K0 < 0 || K0 > K)
    throw std::invalid_argument("constraint K0 must lie in 0..K, got " +
                                std::to_string(K0));
  std::vector<WeightVector> out;
  const std::size_t Q = std::size_t{1} << K;
  for (std::size_t r = 0; r < Q; ++r) {
    const TreatmentLevel z = treatment_from_row(r, K);
    if (z.active_count() <= K0) out.push_back(WeightVector::arm(K, z));
  }
  return out;
}

std::vector<std::size_t> tie_set(std::span<const double> gamma_hats, double eta) {
  if (gamma_hats.empty())
    throw std::invalid_argument("tie_set needs at least one estimate");
  const double top = *std::max_element(gamma_hats.begin(), gamma_hats.end());
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < gamma_hats.size(); ++l)
    if (std::abs(gamma_hats[l] - top) <= eta) out.push_back(l);
  return out;
}

double default_eta(std::span<const double> gamma_hats, std::span<const double> ses) {
  if (gamma_hats.empty() || ses.size() != gamma_hats.size())
    throw std::invalid_argument("default_eta needs matching estimate/se lists");
  const double max_se = *std::max_element(ses.begin(), ses.end());
  if (max_se == 0.0) return 0.0;  // exact-tie mode
  const double L = static_cast<double>(gamma_hats.size());
  return 2.0 * normal_quantile(1.0 - 0.05 / (2.0 * L)) * max_se;
}

TieReport best_arm_estimate(const ArmTable& arms, const WorkingModel& model,
                            const BestArmConfig& config) {
  const int K = arms.factor_count();
  std::vector<WeightVector> weights = config.weights;
  std::vector<std::string> labels;
  if (weights.empty()) {
    if (!config.constraint_k0)
      throw std::invalid_argument(
          "best_arm_estimate needs explicit weights or a constraint K0");
    weights = canonical_weights(K, *config.constraint_k0);
    for (const WeightVector& f : weights)
      for (std::size_t r = 0; r < f.values.size(); ++r)
        if (f.values[r] != 0.0)
          labels.push_back(arm_string(treatment_from_row(r, K), K));
  } else {
    for (std::size_t l = 0; l < weights.size(); ++l)
      labels.push_back("f" + std::to_string(l + 1));
  }
  if (weights.empty()) throw std::invalid_argument("best_arm_estimate: no candidates");

  const VectorEstimate est = rls_vector_estimate(weights, model, arms);
  const std::size_t L = weights.size();

  TieReport report;
  report.labels = std::move(labels);
  report.gamma_hats = est.gamma_hats;
  report.ses.resize(L);
  for (std::size_t l = 0; l < L; ++l)
    report.ses[l] = std::sqrt(std::max(est.covariance_at(l, l), 0.0));

  report.eta = config.eta ? *config.eta : default_eta(report.gamma_hats, report.ses);
  report.tie_indices = tie_set(report.gamma_hats, report.eta);

  // f_(1): the tie-average of the projected weights. Its value and variance
  // follow from the vector estimate without reprojecting.
  const double size = static_cast<double>(report.tie_indices.size());
  double mean = 0.0;
  double v2 = 0.0;
  for (std::size_t i : report.tie_indices) {
    mean += est.gamma_hats[i];
    for (std::size_t j : report.tie_indices) v2 += est.covariance_at(i, j);
  }
  mean /= size;
  v2 /= size * size;

  report.best.gamma_hat = mean;
  report.best.variance = v2;
  report.best.se = std::sqrt(std::max(v2, 0.0));
  const double z = normal_quantile(1.0 - config.alpha_ci / 2.0);
  report.best.ci_lo = mean - z * report.best.se;
  report.best.ci_hi = mean + z * report.best.se;
  report.best.alpha = config.alpha_ci;
  return report;
}

}  // namespace factorial
