#include "factorial/design.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "factorial/errors.hpp"

namespace factorial {

namespace {

void check_factor_count(int K) {
  if (K < 1 || K > kMaxFactors)
    throw std::invalid_argument("factor count K must lie in 1.." +
                                std::to_string(kMaxFactors) + ", got " +
                                std::to_string(K));
}

std::uint32_t reverse_low_bits(std::uint32_t v, int K) {
  std::uint32_t out = 0;
  for (int b = 0; b < K; ++b)
    if (v & (std::uint32_t{1} << b)) out |= std::uint32_t{1} << (K - 1 - b);
  return out;
}

}  // namespace

int FactorSet::level() const { return std::popcount(mask); }

bool FactorSet::contains(int factor) const {
  return factor >= 1 && factor <= 32 && (mask >> (factor - 1)) & 1u;
}

bool FactorSet::subset_of(FactorSet other) const {
  return (mask & ~other.mask) == 0;
}

FactorSet FactorSet::of(std::initializer_list<int> factors) {
  FactorSet s;
  for (int f : factors) {
    if (f < 1 || f > kMaxFactors)
      throw std::invalid_argument("factor index out of range: " + std::to_string(f));
    s.mask |= std::uint32_t{1} << (f - 1);
  }
  return s;
}

FactorSet FactorSet::from_indices(std::span<const int> factors) {
  FactorSet s;
  for (int f : factors) {
    if (f < 1 || f > kMaxFactors)
      throw std::invalid_argument("factor index out of range: " + std::to_string(f));
    s.mask |= std::uint32_t{1} << (f - 1);
  }
  return s;
}

std::vector<int> FactorSet::indices() const {
  std::vector<int> out;
  for (int f = 1; f <= kMaxFactors; ++f)
    if (contains(f)) out.push_back(f);
  return out;
}

std::string FactorSet::label() const {
  std::string out = "{";
  bool first = true;
  for (int f : indices()) {
    if (!first) out += ",";
    out += std::to_string(f);
    first = false;
  }
  out += "}";
  return out;
}

bool effect_order_less(FactorSet a, FactorSet b) {
  const int la = a.level(), lb = b.level();
  if (la != lb) return la < lb;
  return a.mask < b.mask;
}

int TreatmentLevel::active_count() const { return std::popcount(bits); }

int TreatmentLevel::factor_level(int factor) const {
  return static_cast<int>((bits >> (factor - 1)) & 1u);
}

std::size_t row_index(TreatmentLevel z, int K) {
  return reverse_low_bits(z.bits, K);
}

TreatmentLevel treatment_from_row(std::size_t r, int K) {
  return TreatmentLevel{reverse_low_bits(static_cast<std::uint32_t>(r), K)};
}

std::string arm_string(TreatmentLevel z, int K) {
  std::string out(static_cast<std::size_t>(K), '0');
  for (int k = 1; k <= K; ++k)
    if (z.factor_level(k)) out[static_cast<std::size_t>(k - 1)] = '1';
  return out;
}

TreatmentLevel parse_arm_string(std::string_view s) {
  if (s.empty() || s.size() > static_cast<std::size_t>(kMaxFactors))
    throw ParseError("arm string must have 1.." + std::to_string(kMaxFactors) +
                         " characters, got \"" + std::string(s) + "\"",
                     0);
  TreatmentLevel z;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1')
      z.bits |= std::uint32_t{1} << i;
    else if (s[i] != '0')
      throw ParseError("arm string may contain only 0/1, got \"" + std::string(s) + "\"", 0);
  }
  return z;
}

std::vector<FactorSet> all_subsets(int K) {
  check_factor_count(K);
  const std::uint32_t full = (std::uint32_t{1} << K) - 1;
  std::vector<FactorSet> out;
  out.reserve(std::size_t{1} << K);
  for (int d = 0; d <= K; ++d) {
    if (d == 0) {
      out.push_back(FactorSet{});
      continue;
    }
    // Gosper's hack walks the level-d masks in ascending order.
    std::uint32_t m = (std::uint32_t{1} << d) - 1;
    while (m <= full) {
      out.push_back(FactorSet{m});
      const std::uint32_t c = m & -m;
      const std::uint32_t r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }
  return out;
}

WorkingModel WorkingModel::saturated(int K) {
  WorkingModel m;
  m.sets_ = all_subsets(K);
  return m;
}

WorkingModel WorkingModel::from_sets(std::span<const FactorSet> sets) {
  WorkingModel m;
  m.add_all(sets);
  return m;
}

bool WorkingModel::contains(FactorSet s) const {
  auto it = std::lower_bound(sets_.begin(), sets_.end(), s, effect_order_less);
  return it != sets_.end() && *it == s;
}

int WorkingModel::max_level() const { return sets_.back().level(); }

std::vector<FactorSet> WorkingModel::level_slice(int d) const {
  std::vector<FactorSet> out;
  for (FactorSet s : sets_)
    if (s.level() == d) out.push_back(s);
  return out;
}

void WorkingModel::add(FactorSet s) {
  auto it = std::lower_bound(sets_.begin(), sets_.end(), s, effect_order_less);
  if (it != sets_.end() && *it == s) return;
  sets_.insert(it, s);
}

void WorkingModel::add_all(std::span<const FactorSet> sets) {
  for (FactorSet s : sets) add(s);
}

std::vector<std::vector<int>> WorkingModel::to_index_lists() const {
  std::vector<std::vector<int>> out;
  out.reserve(sets_.size());
  for (FactorSet s : sets_) out.push_back(s.indices());
  return out;
}

WorkingModel WorkingModel::from_index_lists(std::span<const std::vector<int>> lists) {
  WorkingModel m;
  for (const auto& indices : lists) m.add(FactorSet::from_indices(indices));
  return m;
}

int contrast_value(FactorSet set, TreatmentLevel z) {
  const int parity = set.level() + std::popcount(set.mask & z.bits);
  return (parity & 1) ? -1 : 1;
}

ContrastMatrix::ContrastMatrix(int K) : K_(K) {
  check_factor_count(K);
  columns_ = all_subsets(K);
  positions_.assign(std::size_t{1} << K, 0);
  for (std::size_t j = 0; j < columns_.size(); ++j)
    positions_[columns_[j].mask] = static_cast<std::uint32_t>(j);
}

int ContrastMatrix::entry(std::size_t row, std::size_t col) const {
  return contrast_value(columns_[col], treatment_from_row(row, K_));
}

std::vector<double> ContrastMatrix::column(FactorSet s) const {
  const std::size_t Q = arm_count();
  std::vector<double> out(Q);
  for (std::size_t r = 0; r < Q; ++r)
    out[r] = static_cast<double>(contrast_value(s, treatment_from_row(r, K_)));
  return out;
}

std::vector<std::int8_t> ContrastMatrix::dense() const {
  if (K_ > kMaxDenseFactors)
    throw std::invalid_argument("dense contrast matrix limited to K <= " +
                                std::to_string(kMaxDenseFactors));
  const std::size_t Q = arm_count();
  std::vector<std::int8_t> out(Q * Q);
  for (std::size_t r = 0; r < Q; ++r) {
    const TreatmentLevel z = treatment_from_row(r, K_);
    for (std::size_t j = 0; j < Q; ++j)
      out[r * Q + j] = static_cast<std::int8_t>(contrast_value(columns_[j], z));
  }
  return out;
}

ContrastMatrix contrast_matrix(int K) { return ContrastMatrix(K); }

void walsh_hadamard_inplace(std::span<double> values) {
  const std::size_t n = values.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = values[j];
        const double y = values[j + h];
        values[j] = x + y;
        values[j + h] = x - y;
      }
    }
  }
}

std::vector<double> effect_transform(std::span<const double> arm_values, int K) {
  check_factor_count(K);
  const std::size_t Q = std::size_t{1} << K;
  if (arm_values.size() != Q)
    throw std::invalid_argument("effect_transform expects a length-" + std::to_string(Q) +
                                " vector, got " + std::to_string(arm_values.size()));
  std::vector<double> work(arm_values.begin(), arm_values.end());
  walsh_hadamard_inplace(work);
  // work[m] = sum_r (-1)^popcount(m & r) v[r]; the subset with factor mask s
  // lives at the bit-reversed slot, with sign (-1)^|s|.
  const double scale = 1.0 / static_cast<double>(Q);
  std::vector<double> out(Q);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) {
    const std::uint32_t slot = reverse_low_bits(s.mask, K);
    const double sign = (s.level() & 1) ? -1.0 : 1.0;
    out[pos++] = sign * scale * work[slot];
  }
  return out;
}

std::vector<double> inverse_effect_transform(std::span<const double> effects, int K) {
  check_factor_count(K);
  const std::size_t Q = std::size_t{1} << K;
  if (effects.size() != Q)
    throw std::invalid_argument("inverse_effect_transform expects a length-" +
                                std::to_string(Q) + " vector, got " +
                                std::to_string(effects.size()));
  std::vector<double> work(Q, 0.0);
  std::size_t pos = 0;
  for (FactorSet s : all_subsets(K)) {
    const std::uint32_t slot = reverse_low_bits(s.mask, K);
    const double sign = (s.level() & 1) ? -1.0 : 1.0;
    work[slot] = sign * effects[pos++];
  }
  walsh_hadamard_inplace(work);
  return work;
}

std::vector<FactorSet> heredity_expand(std::span<const FactorSet> prev, int d,
                                       Heredity mode, int K) {
  check_factor_count(K);
  if (d < 1 || d > K) return {};
  std::vector<FactorSet> out;
  if (d == 1) {
    // The intercept is every singleton's only parent, so all K singletons
    // qualify regardless of mode.
    for (int f = 1; f <= K; ++f) out.push_back(FactorSet::of({f}));
    return out;
  }
  std::vector<bool> selected(std::size_t{1} << K, false);
  for (FactorSet s : prev) selected[s.mask] = true;

  const std::uint32_t full = (std::uint32_t{1} << K) - 1;
  std::uint32_t m = (std::uint32_t{1} << d) - 1;
  while (m <= full) {
    bool any = false;
    bool all = true;
    std::uint32_t rest = m;
    while (rest) {
      const std::uint32_t bit = rest & -rest;
      if (selected[m ^ bit])
        any = true;
      else
        all = false;
      rest ^= bit;
    }
    if (mode == Heredity::weak ? any : all) out.push_back(FactorSet{m});
    std::uint32_t c = m & -m;
    std::uint32_t r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
  return out;
}

std::vector<std::vector<FactorSet>> heredity_closure(std::span<const FactorSet> base,
                                                     int depth, Heredity mode, int K) {
  std::vector<std::vector<FactorSet>> out;
  if (depth <= 0) return out;
  if (base.empty()) {
    // The closure of a dead branch stays dead.
    out.assign(static_cast<std::size_t>(depth), {});
    return out;
  }
  const int level = base.front().level();
  std::vector<FactorSet> current(base.begin(), base.end());
  for (int t = 0; t < depth; ++t) {
    current = heredity_expand(current, level + t + 1, mode, K);
    out.push_back(current);
  }
  return out;
}

}  // namespace factorial
