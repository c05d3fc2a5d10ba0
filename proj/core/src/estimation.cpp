#include "factorial/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "factorial/errors.hpp"
#include "factorial/stats.hpp"

namespace factorial {

namespace {

void require_matching_k(int K, const ArmTable& arms, const char* who) {
  if (K != arms.factor_count())
    throw std::invalid_argument(std::string(who) + ": factor count mismatch (" +
                                std::to_string(K) + " vs " +
                                std::to_string(arms.factor_count()) + ")");
}

void require_replication(const ArmTable& arms, std::int64_t min_n, const char* who) {
  auto missing = arms.arms_below(min_n);
  if (missing.empty()) return;
  std::string what = std::string(who) + " needs at least " + std::to_string(min_n) +
                     " unit(s) in every arm; short arms:";
  for (const auto& a : missing) what += " " + a;
  throw ReplicationError(std::move(what), std::move(missing), static_cast<int>(min_n));
}

GammaEstimate wald_estimate(double gamma_hat, double variance, double alpha) {
  GammaEstimate est;
  est.gamma_hat = gamma_hat;
  est.variance = variance;
  est.se = std::sqrt(std::max(variance, 0.0));
  const double z = normal_quantile(1.0 - alpha / 2.0);
  est.ci_lo = gamma_hat - z * est.se;
  est.ci_hi = gamma_hat + z * est.se;
  est.alpha = alpha;
  return est;
}

// Sigma_hat(M)[j,k] = Q^{-2} sum_z Vhat(z) g_J(z) g_K(z) and the product of
// two contrast columns is the column of their symmetric difference, so one
// transform of the Vhat diagonal yields every entry.
std::vector<double> covariance_from_diag(const std::vector<double>& diag,
                                         const WorkingModel& model, int K) {
  const std::size_t Q = std::size_t{1} << K;
  const std::vector<double> u = effect_transform(diag, K);
  std::vector<std::uint32_t> position(Q);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) position[s.mask] = static_cast<std::uint32_t>(pos++);

  const auto& sets = model.sets();
  const std::size_t p = sets.size();
  std::vector<double> cov(p * p);
  const double scale = 1.0 / static_cast<double>(Q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const std::uint32_t diff = sets[i].mask ^ sets[j].mask;
      const double value = scale * u[position[diff]];
      cov[i * p + j] = value;
      cov[j * p + i] = value;
    }
  }
  return cov;
}

}  // namespace

int WeightVector::nonzero_count() const {
  int s = 0;
  for (double v : values)
    if (v != 0.0) ++s;
  return s;
}

WeightVector WeightVector::zeros(int K) {
  return WeightVector{K, std::vector<double>(std::size_t{1} << K, 0.0)};
}

WeightVector WeightVector::arm(int K, TreatmentLevel z) {
  WeightVector f = zeros(K);
  f.values[row_index(z, K)] = 1.0;
  return f;
}

WeightVector WeightVector::contrast(int K, FactorSet set) {
  WeightVector f = zeros(K);
  for (std::size_t r = 0; r < f.values.size(); ++r)
    f.values[r] = static_cast<double>(contrast_value(set, treatment_from_row(r, K)));
  return f;
}

WeightVector WeightVector::custom(int K, std::vector<double> values) {
  if (values.size() != (std::size_t{1} << K))
    throw std::invalid_argument("custom weight vector needs 2^K entries");
  return WeightVector{K, std::move(values)};
}

double EffectEstimate::t_stat() const {
  if (se == 0.0)
    return tau_hat == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(tau_hat) / se;
}

WlsFit wls_effects(const ArmTable& arms, const WorkingModel& model) {
  const int K = arms.factor_count();
  require_replication(arms, 1, "wls_effects point estimation");
  require_replication(arms, 2, "wls_effects covariance estimation");

  const std::size_t Q = arms.arm_count();
  const std::vector<double> all_effects = effect_transform(arms.means(), K);

  std::vector<std::uint32_t> position(Q);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) position[s.mask] = static_cast<std::uint32_t>(pos++);

  std::vector<double> diag(Q);
  for (std::size_t r = 0; r < Q; ++r) diag[r] = arms.at(r).vhat();

  WlsFit fit;
  fit.model = model;
  fit.covariance = covariance_from_diag(diag, model, K);
  const auto& sets = model.sets();
  fit.effects.reserve(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    EffectEstimate e;
    e.set = sets[i];
    e.tau_hat = all_effects[position[sets[i].mask]];
    e.se = std::sqrt(std::max(fit.covariance[i * sets.size() + i], 0.0));
    fit.effects.push_back(e);
  }
  return fit;
}

std::vector<double> ehw_hc2_covariance(const ArmTable& arms, const WorkingModel& model) {
  const int K = arms.factor_count();
  require_replication(arms, 2, "ehw_hc2_covariance");

  const std::size_t Q = arms.arm_count();
  const std::vector<double> fitted = restricted_arm_means(arms, model);

  std::vector<double> diag(Q);
  for (std::size_t r = 0; r < Q; ++r) {
    const ArmSummary& a = arms.at(r);
    const double n = static_cast<double>(a.n);
    const double resid = a.mean - fitted[r];
    const double s_prime = a.var + n / (n - 1.0) * resid * resid;
    diag[r] = s_prime / n;
  }
  return covariance_from_diag(diag, model, K);
}

GammaEstimate plug_in_estimate(const WeightVector& f, const ArmTable& arms, double alpha) {
  require_matching_k(f.K, arms, "plug_in_estimate");
  if (f.nonzero_count() == 0)
    throw std::invalid_argument("plug_in_estimate: weight vector is identically zero");

  std::vector<std::string> short_arms;
  double gamma = 0.0;
  double v2 = 0.0;
  for (std::size_t r = 0; r < f.values.size(); ++r) {
    const double w = f.values[r];
    if (w == 0.0) continue;
    const ArmSummary& a = arms.at(r);
    if (a.n < 2) {
      short_arms.push_back(arm_string(a.arm, f.K));
      continue;
    }
    gamma += w * a.mean;
    v2 += w * w * a.vhat();
  }
  if (!short_arms.empty()) {
    std::string what = "plug_in_estimate needs n >= 2 on every weighted arm; short arms:";
    for (const auto& a : short_arms) what += " " + a;
    throw ReplicationError(std::move(what), std::move(short_arms), 2);
  }
  return wald_estimate(gamma, v2, alpha);
}

WeightVector project_weight(const WeightVector& f, const WorkingModel& model) {
  const int K = f.K;
  std::vector<double> coeffs = effect_transform(f.values, K);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) {
    if (!model.contains(s)) coeffs[pos] = 0.0;
    ++pos;
  }
  return WeightVector{K, inverse_effect_transform(coeffs, K)};
}

std::vector<double> restricted_arm_means(const ArmTable& arms, const WorkingModel& model) {
  const int K = arms.factor_count();
  require_replication(arms, 1, "restricted_arm_means");
  std::vector<double> coeffs = effect_transform(arms.means(), K);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) {
    if (!model.contains(s)) coeffs[pos] = 0.0;
    ++pos;
  }
  return inverse_effect_transform(coeffs, K);
}

GammaEstimate rls_estimate(const WeightVector& f, const WorkingModel& model,
                           const ArmTable& arms, double alpha) {
  require_matching_k(f.K, arms, "rls_estimate");
  const WeightVector projected = project_weight(f, model);

  std::vector<std::string> short_arms;
  double gamma = 0.0;
  double v2 = 0.0;
  for (std::size_t r = 0; r < projected.values.size(); ++r) {
    const double w = projected.values[r];
    if (w == 0.0) continue;
    const ArmSummary& a = arms.at(r);
    if (a.n < 2) {
      short_arms.push_back(arm_string(a.arm, f.K));
      continue;
    }
    gamma += w * a.mean;
    v2 += w * w * a.vhat();
  }
  if (!short_arms.empty()) {
    std::string what = "rls_estimate needs n >= 2 on every arm carrying projected weight; short arms:";
    for (const auto& a : short_arms) what += " " + a;
    throw ReplicationError(std::move(what), std::move(short_arms), 2);
  }
  return wald_estimate(gamma, v2, alpha);
}

VectorEstimate rls_vector_estimate(std::span<const WeightVector> weights,
                                   const WorkingModel& model, const ArmTable& arms) {
  if (weights.empty())
    throw std::invalid_argument("rls_vector_estimate needs at least one weight vector");
  const int K = weights.front().K;
  require_matching_k(K, arms, "rls_vector_estimate");
  require_replication(arms, 2, "rls_vector_estimate");

  const std::size_t Q = arms.arm_count();
  const std::size_t L = weights.size();

  std::vector<WeightVector> projected;
  projected.reserve(L);
  for (const WeightVector& f : weights) {
    if (f.K != K) throw std::invalid_argument("rls_vector_estimate: mixed factor counts");
    projected.push_back(project_weight(f, model));
  }

  const std::vector<double> means = arms.means();
  std::vector<double> diag(Q);
  for (std::size_t r = 0; r < Q; ++r) diag[r] = arms.at(r).vhat();

  VectorEstimate out;
  out.gamma_hats.resize(L, 0.0);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t r = 0; r < Q; ++r)
      out.gamma_hats[l] += projected[l].values[r] * means[r];

  out.covariance.assign(L * L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = i; j < L; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < Q; ++r)
        acc += projected[i].values[r] * diag[r] * projected[j].values[r];
      out.covariance[i * L + j] = acc;
      out.covariance[j * L + i] = acc;
    }
  }
  return out;
}

EfficiencyDiagnostic efficiency_bound(const WeightVector& f, const WorkingModel& model,
                                      const ArmTable& arms) {
  require_matching_k(f.K, arms, "efficiency_bound");
  const WeightVector projected = project_weight(f, model);

  double norm2 = 0.0;
  double proj2 = 0.0;
  for (std::size_t r = 0; r < f.values.size(); ++r) {
    norm2 += f.values[r] * f.values[r];
    proj2 += projected.values[r] * projected.values[r];
  }

  double vmin = std::numeric_limits<double>::infinity();
  double vmax = 0.0;
  for (const ArmSummary& a : arms.arms()) {
    if (!a.has_var()) continue;
    vmin = std::min(vmin, a.vhat());
    vmax = std::max(vmax, a.vhat());
  }
  double kappa = 1.0;
  if (vmax > 0.0)
    kappa = vmin > 0.0 ? vmax / vmin : std::numeric_limits<double>::infinity();

  EfficiencyDiagnostic diag;
  diag.projected_norm_ratio = norm2 > 0.0 ? proj2 / norm2 : 0.0;
  diag.nonzero_weights = f.nonzero_count();
  diag.model_size = model.size();
  diag.arm_count = arms.arm_count();
  diag.variance_ratio_bound = kappa * static_cast<double>(diag.nonzero_weights) *
                              static_cast<double>(diag.model_size) /
                              static_cast<double>(diag.arm_count);
  diag.kappa_proxy = kappa;
  return diag;
}

}  // namespace factorial
