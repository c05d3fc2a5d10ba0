#include "factorial/dataset.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace factorial {

ArmTable::ArmTable(int K, std::vector<ArmSummary> arms) : K_(K), arms_(std::move(arms)) {
  if (arms_.size() != (std::size_t{1} << K_))
    throw std::invalid_argument("ArmTable needs one summary per arm");
  for (const ArmSummary& a : arms_) total_ += a.n;
}

std::vector<double> ArmTable::means() const {
  std::vector<double> out(arms_.size());
  for (std::size_t r = 0; r < arms_.size(); ++r) out[r] = arms_[r].mean;
  return out;
}

std::vector<double> ArmTable::vhat_diag() const {
  std::vector<double> out(arms_.size());
  for (std::size_t r = 0; r < arms_.size(); ++r)
    out[r] = arms_[r].has_var() ? arms_[r].vhat()
                                : std::numeric_limits<double>::quiet_NaN();
  return out;
}

bool ArmTable::inference_ready(std::int64_t min_n) const {
  for (const ArmSummary& a : arms_)
    if (a.n < min_n) return false;
  return true;
}

std::vector<std::string> ArmTable::arms_below(std::int64_t min_n) const {
  std::vector<std::string> out;
  for (const ArmSummary& a : arms_)
    if (a.n < min_n) out.push_back(arm_string(a.arm, K_));
  return out;
}

ArmTable summarize(const FactorialDataset& dataset) {
  const std::size_t Q = std::size_t{1} << dataset.K;
  std::vector<ArmSummary> arms(Q);
  for (std::size_t r = 0; r < Q; ++r)
    arms[r].arm = treatment_from_row(r, dataset.K);

  std::vector<double> sum(Q, 0.0);
  for (std::size_t i = 0; i < dataset.unit_count(); ++i) {
    const std::size_t r = row_index(dataset.z[i], dataset.K);
    ++arms[r].n;
    sum[r] += dataset.y[i];
  }
  for (std::size_t r = 0; r < Q; ++r)
    if (arms[r].n > 0) arms[r].mean = sum[r] / static_cast<double>(arms[r].n);

  std::vector<double> ss(Q, 0.0);
  for (std::size_t i = 0; i < dataset.unit_count(); ++i) {
    const std::size_t r = row_index(dataset.z[i], dataset.K);
    const double d = dataset.y[i] - arms[r].mean;
    ss[r] += d * d;
  }
  for (std::size_t r = 0; r < Q; ++r)
    if (arms[r].n >= 2) arms[r].var = ss[r] / static_cast<double>(arms[r].n - 1);

  return ArmTable(dataset.K, std::move(arms));
}

}  // namespace factorial
