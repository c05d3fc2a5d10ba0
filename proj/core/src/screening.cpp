#include "factorial/screening.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "factorial/errors.hpp"
#include "factorial/stats.hpp"

namespace factorial {

double ScreeningConfig::alpha_at(int d) const {
  if (alphas.size() == 1) return alphas.front();
  return alphas[static_cast<std::size_t>(d - 1)];
}

void ScreeningConfig::validate(int K) const {
  if (max_level < 1 || max_level > K)
    throw std::invalid_argument("screening depth D must lie in 1..K, got " +
                                std::to_string(max_level));
  if (alphas.empty() ||
      (alphas.size() != 1 && alphas.size() < static_cast<std::size_t>(max_level)))
    throw std::invalid_argument("need one alpha or at least D per-level alphas");
  for (double a : alphas)
    if (!(a > 0.0 && a <= 1.0))
      throw std::invalid_argument("per-level alpha must lie in (0,1], got " +
                                  std::to_string(a));
  if (strategy != Strategy::full && (pivot_level < 1 || pivot_level > max_level))
    throw std::invalid_argument("strategy pivot d* must lie in 1..D, got " +
                                std::to_string(pivot_level));
  if (lasso_lambda && *lasso_lambda < 0.0)
    throw std::invalid_argument("lasso lambda must be >= 0");
  if (!(alpha_ci > 0.0 && alpha_ci < 1.0))
    throw std::invalid_argument("alpha_ci must lie in (0,1)");
}

std::vector<FactorSet> bonferroni_t_select(std::span<const EffectEstimate> candidates,
                                           double alpha_d, std::size_t m) {
  std::vector<FactorSet> selected;
  if (m == 0 || candidates.empty()) return selected;
  const double level = std::min(alpha_d / static_cast<double>(m), 1.0);
  const double threshold = level >= 1.0 ? 0.0 : normal_quantile(1.0 - level / 2.0);
  for (const EffectEstimate& e : candidates)
    if (e.tau_hat != 0.0 && e.t_stat() >= threshold) selected.push_back(e.set);
  return selected;
}

std::vector<FactorSet> lasso_select(std::span<const EffectEstimate> candidates,
                                    double lambda) {
  std::vector<FactorSet> selected;
  for (const EffectEstimate& e : candidates)
    if (std::abs(e.tau_hat) >= lambda) selected.push_back(e.set);
  return selected;
}

double selection_threshold(const ScreeningConfig& config, int d, std::size_t m,
                           std::span<const EffectEstimate> candidates) {
  const double level =
      m == 0 ? 1.0 : std::min(config.alpha_at(d) / static_cast<double>(m), 1.0);
  const double z = level >= 1.0 ? 0.0 : normal_quantile(1.0 - level / 2.0);
  if (config.s_step == SStep::bonferroni_t) return z;
  if (config.lasso_lambda) return *config.lasso_lambda;
  // Default lambda: align the lasso with the t-test by scaling the Bonferroni
  // quantile with the median candidate standard error.
  std::vector<double> ses;
  ses.reserve(candidates.size());
  for (const EffectEstimate& e : candidates) ses.push_back(e.se);
  if (ses.empty()) return 0.0;
  std::sort(ses.begin(), ses.end());
  const std::size_t n = ses.size();
  const double median = n % 2 == 1 ? ses[n / 2] : 0.5 * (ses[n / 2 - 1] + ses[n / 2]);
  return z * median;
}

ScreeningTrace forward_screen(const ArmTable& arms, const ScreeningConfig& config) {
  const int K = arms.factor_count();
  config.validate(K);
  if (!arms.inference_ready()) {
    auto missing = arms.arms_below(2);
    std::string what = "forward_screen needs n >= 2 in every arm; short arms:";
    for (const auto& a : missing) what += " " + a;
    throw ReplicationError(std::move(what), std::move(missing), 2);
  }

  const int tested_depth =
      config.strategy == Strategy::full ? config.max_level : config.pivot_level;

  ScreeningTrace trace;
  WorkingModel model;  // starts as the intercept-only model
  for (int d = 1; d <= tested_depth; ++d) {
    LevelTrace level;
    level.level = d;

    const std::vector<FactorSet> prev = model.level_slice(d - 1);
    const std::vector<FactorSet> candidates =
        heredity_expand(prev, d, config.heredity, K);
    const std::size_t m = candidates.size();

    if (m == 0) {
      trace.levels.push_back(std::move(level));
      continue;
    }

    WorkingModel intermediate = model;
    intermediate.add_all(candidates);

    WlsFit fit;
    try {
      fit = wls_effects(arms, intermediate);
    } catch (const Error& err) {
      throw Error("forward_screen level " + std::to_string(d) + ": " + err.what());
    }

    std::vector<EffectEstimate> level_estimates;
    level_estimates.reserve(m);
    for (const EffectEstimate& e : fit.effects)
      if (e.set.level() == d) level_estimates.push_back(e);

    const double threshold = selection_threshold(config, d, m, level_estimates);
    const std::vector<FactorSet> survivors =
        config.s_step == SStep::bonferroni_t
            ? bonferroni_t_select(level_estimates, config.alpha_at(d), m)
            : lasso_select(level_estimates, threshold);

    std::vector<bool> keep(std::size_t{1} << K, false);
    for (FactorSet s : survivors) keep[s.mask] = true;

    for (const EffectEstimate& e : level_estimates) {
      CandidateRecord rec;
      rec.set = e.set;
      rec.tau_hat = e.tau_hat;
      rec.se = e.se;
      rec.threshold = threshold;
      rec.selected = keep[e.set.mask];
      level.candidates.push_back(rec);
      if (rec.selected) level.selected.push_back(e.set);
    }
    model.add_all(level.selected);
    trace.levels.push_back(std::move(level));
  }

  if (config.strategy == Strategy::over) {
    // Levels beyond d* join by heredity alone, untested.
    std::vector<FactorSet> slice = model.level_slice(config.pivot_level);
    for (int d = config.pivot_level + 1; d <= config.max_level; ++d) {
      slice = heredity_expand(slice, d, config.heredity, K);
      LevelTrace level;
      level.level = d;
      for (FactorSet s : slice) {
        CandidateRecord rec;
        rec.set = s;
        rec.tested = false;
        rec.selected = true;
        level.candidates.push_back(rec);
        level.selected.push_back(s);
      }
      model.add_all(slice);
      trace.levels.push_back(std::move(level));
    }
  }

  trace.final_model = std::move(model);
  return trace;
}

bool respects_heredity(const WorkingModel& model, Heredity mode) {
  for (FactorSet s : model.sets()) {
    if (s.level() < 2) continue;
    int present = 0;
    int total = 0;
    std::uint32_t rest = s.mask;
    while (rest) {
      const std::uint32_t bit = rest & -rest;
      ++total;
      if (model.contains(FactorSet{s.mask ^ bit})) ++present;
      rest ^= bit;
    }
    if (mode == Heredity::strong ? present != total : present == 0) return false;
  }
  return true;
}

}  // namespace factorial
