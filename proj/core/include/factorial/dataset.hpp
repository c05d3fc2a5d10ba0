#ifndef FACTORIAL_DATASET_HPP
#define FACTORIAL_DATASET_HPP

// Observed factorial data and its per-arm summaries.

#include <cstdint>
#include <vector>

#include "factorial/design.hpp"

namespace factorial {

// Unit count, sample mean and sample variance (divisor n-1) for one arm.
struct ArmSummary {
  TreatmentLevel arm;
  std::int64_t n = 0;
  double mean = 0.0;  // meaningful iff n >= 1
  double var = 0.0;   // meaningful iff n >= 2

  bool has_mean() const { return n >= 1; }
  bool has_var() const { return n >= 2; }

  // Entry of the diagonal covariance estimate, var / n; defined iff n >= 2.
  double vhat() const { return var / static_cast<double>(n); }
};

// Per-arm summaries for all Q arms, indexed by r(z).
class ArmTable {
 public:
  ArmTable(int K, std::vector<ArmSummary> arms);

  int factor_count() const { return K_; }
  std::size_t arm_count() const { return arms_.size(); }
  const std::vector<ArmSummary>& arms() const { return arms_; }
  const ArmSummary& at(std::size_t r) const { return arms_[r]; }
  std::int64_t total_units() const { return total_; }

  std::vector<double> means() const;

  // Diagonal of V_hat; entries with n < 2 are NaN (flagged undefined).
  std::vector<double> vhat_diag() const;

  bool inference_ready(std::int64_t min_n = 2) const;
  // Arm strings of every arm with fewer than min_n units.
  std::vector<std::string> arms_below(std::int64_t min_n) const;

 private:
  int K_;
  std::vector<ArmSummary> arms_;
  std::int64_t total_ = 0;
};

// Observed (z, y) pairs from a 2^K experiment.
struct FactorialDataset {
  int K = 0;
  std::vector<TreatmentLevel> z;
  std::vector<double> y;

  std::size_t unit_count() const { return y.size(); }
};

// Per-arm n, mean and variance plus the diagonal variance estimate.
ArmTable summarize(const FactorialDataset& dataset);

}  // namespace factorial

#endif
