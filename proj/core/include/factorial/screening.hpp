#ifndef FACTORIAL_SCREENING_HPP
#define FACTORIAL_SCREENING_HPP

// Forward factorial screening: alternate heredity expansion (H-step) with a
// pluggable sparsity test (S-step) level by level, with under- and
// over-selection strategies for imperfect screening.

#include <optional>
#include <span>
#include <vector>

#include "factorial/estimation.hpp"

namespace factorial {

enum class SStep { bonferroni_t, lasso };
enum class Strategy { full, under, over };

struct ScreeningConfig {
  int max_level = 2;                  // D
  std::vector<double> alphas = {0.05};  // broadcast when a single value
  Heredity heredity = Heredity::strong;
  SStep s_step = SStep::bonferroni_t;
  std::optional<double> lasso_lambda;  // per-level default rule when unset
  Strategy strategy = Strategy::full;
  int pivot_level = 0;  // d* for under/over
  double alpha_ci = 0.05;

  double alpha_at(int d) const;  // d in 1..max_level
  void validate(int K) const;    // throws std::invalid_argument
};

struct CandidateRecord {
  FactorSet set;
  double tau_hat = 0.0;
  double se = 0.0;
  double threshold = 0.0;
  bool selected = false;
  bool tested = true;  // false on heredity-closure levels of Strategy over
};

struct LevelTrace {
  int level = 0;
  std::vector<CandidateRecord> candidates;  // after heredity pruning
  std::vector<FactorSet> selected;
};

struct ScreeningTrace {
  std::vector<LevelTrace> levels;
  WorkingModel final_model;
};

// Bonferroni-corrected marginal t selection at level alpha_d over m new
// candidates: keep K iff |tau|/se >= z(1 - min{alpha_d/m, 1}/2), with the
// zero-variance rules from EffectEstimate::t_stat. Candidates with tau == 0
// are never kept.
std::vector<FactorSet> bonferroni_t_select(std::span<const EffectEstimate> candidates,
                                           double alpha_d, std::size_t m);

// Hard thresholding |tau| >= lambda (boundary inclusive).
std::vector<FactorSet> lasso_select(std::span<const EffectEstimate> candidates,
                                    double lambda);

// The selection threshold the S-step applies at level d with m candidates.
// For the lasso this is the configured lambda or, when unset,
// z(1 - alpha_d/(2m)) times the median candidate standard error.
double selection_threshold(const ScreeningConfig& config, int d, std::size_t m,
                           std::span<const EffectEstimate> candidates);

// Forward screening over levels 1..D. Requires n(z) >= 2 on every arm.
ScreeningTrace forward_screen(const ArmTable& arms, const ScreeningConfig& config);

// True when every member of level >= 2 has at least one (weak) or all
// (strong) of its level-(d-1) parents in the model.
bool respects_heredity(const WorkingModel& model, Heredity mode);

}  // namespace factorial

#endif
