#ifndef FACTORIAL_ESTIMATION_HPP
#define FACTORIAL_ESTIMATION_HPP

// Design-based estimators for 2^K factorial experiments: WLS factorial
// effects with direct and EHW/HC2 covariance estimators, plug-in and
// restricted-least-squares estimators of weighted causal parameters, Wald
// intervals and efficiency diagnostics.

#include <span>
#include <vector>

#include "factorial/dataset.hpp"
#include "factorial/design.hpp"

namespace factorial {

// A pre-specified length-Q weighting vector f defining gamma = f' Ybar,
// indexed like the contrast matrix rows.
struct WeightVector {
  int K = 0;
  std::vector<double> values;

  std::size_t arm_count() const { return values.size(); }
  int nonzero_count() const;

  static WeightVector zeros(int K);
  // e(z): picks out one arm mean.
  static WeightVector arm(int K, TreatmentLevel z);
  // g_K: the contrast column, so gamma = Q * tau_K.
  static WeightVector contrast(int K, FactorSet set);
  static WeightVector custom(int K, std::vector<double> values);
};

struct EffectEstimate {
  FactorSet set;
  double tau_hat = 0.0;
  double se = 0.0;

  // |tau|/se with the zero-variance limit rules: +inf when se == 0 and
  // tau != 0, 0 when both vanish.
  double t_stat() const;
};

// WLS fit of an unsaturated working model: point estimates for every member
// plus the direct covariance estimator Sigma_hat (row-major model.size()^2).
struct WlsFit {
  WorkingModel model;
  std::vector<EffectEstimate> effects;
  std::vector<double> covariance;

  double covariance_at(std::size_t i, std::size_t j) const {
    return covariance[i * effects.size() + j];
  }
};

// Closed-form WLS: tau_hat = Q^{-1} G(.,M)' Yhat with
// Sigma_hat = Q^{-2} G(.,M)' Vhat G(.,M). Throws ReplicationError naming the
// arms when some arm has n = 0 (point estimates) or n = 1 (covariance).
WlsFit wls_effects(const ArmTable& arms, const WorkingModel& model);

// EHW/HC2 covariance: the direct estimator with per-arm variances inflated by
// the squared regression residual of the arm mean. Row-major model.size()^2.
std::vector<double> ehw_hc2_covariance(const ArmTable& arms, const WorkingModel& model);

struct GammaEstimate {
  double gamma_hat = 0.0;
  double variance = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double alpha = 0.05;
};

// gamma_hat = f' Yhat with v2 = sum f(z)^2 Vhat(z); requires n(z) >= 2 on
// every arm with f(z) != 0.
GammaEstimate plug_in_estimate(const WeightVector& f, const ArmTable& arms,
                               double alpha = 0.05);

// f[M] = Q^{-1} G(.,M) G(.,M)' f, the orthogonal projection of f onto the
// span of the selected contrast columns. O(Q log Q).
WeightVector project_weight(const WeightVector& f, const WorkingModel& model);

// Yhat_R = Q^{-1} G(.,M) G(.,M)' Yhat, the restricted fit of the arm means.
std::vector<double> restricted_arm_means(const ArmTable& arms, const WorkingModel& model);

// RLS estimator gamma_R = f[M]' Yhat with v2_R = f[M]' Vhat f[M]. The
// projected weight is generically dense, so effectively all arms need n >= 2.
GammaEstimate rls_estimate(const WeightVector& f, const WorkingModel& model,
                           const ArmTable& arms, double alpha = 0.05);

// Component-wise RLS for a list of weighting vectors with the full L x L
// cross-covariance F[M]' Vhat F[M] (row-major).
struct VectorEstimate {
  std::vector<double> gamma_hats;
  std::vector<double> covariance;

  double covariance_at(std::size_t i, std::size_t j) const {
    return covariance[i * gamma_hats.size() + j];
  }
};

VectorEstimate rls_vector_estimate(std::span<const WeightVector> weights,
                                   const WorkingModel& model, const ArmTable& arms);

// Variance-ratio diagnostics for the RLS-vs-plug-in comparison: the realized
// projection ratio and the kappa * s * |M| / Q bound with the estimated
// diagonal covariance standing in for the true one.
struct EfficiencyDiagnostic {
  double projected_norm_ratio = 0.0;  // ||f[M]||^2 / ||f||^2
  int nonzero_weights = 0;            // s*
  std::size_t model_size = 0;         // |M|
  std::size_t arm_count = 0;          // Q
  double kappa_proxy = 1.0;           // cond. number of diag Vhat
  double variance_ratio_bound = 0.0;  // kappa * s* |M| / Q
};

EfficiencyDiagnostic efficiency_bound(const WeightVector& f, const WorkingModel& model,
                                      const ArmTable& arms);

}  // namespace factorial

#endif
