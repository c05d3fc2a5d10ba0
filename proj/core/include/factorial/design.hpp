#ifndef FACTORIAL_DESIGN_HPP
#define FACTORIAL_DESIGN_HPP

// Bit-level representation of 2^K factorial designs: factor subsets,
// treatment levels, the +/-1 contrast matrix, fast effect transforms and
// heredity operators.
//
// Conventions used throughout the library:
//   * FactorSet::mask and TreatmentLevel::bits store factor k at bit k-1.
//   * Arms are indexed by the lexicographic row index
//       r(z) = sum_k z_k * 2^(K-k)
//     so z_1 is the most significant digit and r((0,...,0)) = 0.
//   * Effect vectors are ordered over all subsets by (level, mask ascending),
//     the same order a full-power-set WorkingModel uses.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factorial {

// Dense length-Q vectors stay below ~8 MiB up to this cap.
inline constexpr int kMaxFactors = 20;

// Dense Q x Q materialization of the contrast matrix is only offered up to
// this cap (beyond it the implicit entry() accessor remains available).
inline constexpr int kMaxDenseFactors = 13;

// A subset of the K factors, indexing one factorial effect. The empty set
// denotes the intercept.
struct FactorSet {
  std::uint32_t mask = 0;

  int level() const;
  bool contains(int factor) const;  // factor in 1..K
  bool subset_of(FactorSet other) const;

  static FactorSet of(std::initializer_list<int> factors);
  static FactorSet from_indices(std::span<const int> factors);
  std::vector<int> indices() const;  // ascending factor indices
  std::string label() const;         // "{}", "{1}", "{1,3}", ...

  friend auto operator<=>(const FactorSet&, const FactorSet&) = default;
};

// Orders subsets by (level, mask ascending); the canonical column order.
bool effect_order_less(FactorSet a, FactorSet b);

// One of the Q = 2^K treatment combinations.
struct TreatmentLevel {
  std::uint32_t bits = 0;

  int active_count() const;
  int factor_level(int factor) const;  // z_k for factor in 1..K

  friend auto operator<=>(const TreatmentLevel&, const TreatmentLevel&) = default;
};

// Lexicographic row index r(z); inverse mapping below.
std::size_t row_index(TreatmentLevel z, int K);
TreatmentLevel treatment_from_row(std::size_t r, int K);

// "z1 z2 ... zK" as a K-character 0/1 string.
std::string arm_string(TreatmentLevel z, int K);
// Throws ParseError on characters outside {0,1} or length outside 1..kMaxFactors.
TreatmentLevel parse_arm_string(std::string_view s);

// All 2^K subsets in (level, mask ascending) order.
std::vector<FactorSet> all_subsets(int K);

// An ordered collection of factor subsets defining an unsaturated regression.
// Always contains the intercept, holds no duplicates, and keeps its members
// sorted by (level, mask ascending).
class WorkingModel {
 public:
  WorkingModel() : sets_{FactorSet{}} {}

  static WorkingModel intercept_only() { return WorkingModel(); }
  static WorkingModel saturated(int K);
  static WorkingModel from_sets(std::span<const FactorSet> sets);

  const std::vector<FactorSet>& sets() const { return sets_; }
  std::size_t size() const { return sets_.size(); }
  bool contains(FactorSet s) const;
  int max_level() const;

  std::vector<FactorSet> level_slice(int d) const;

  // Inserts while preserving order; duplicates are ignored.
  void add(FactorSet s);
  void add_all(std::span<const FactorSet> sets);

  // Nested-list form [[],[1],[1,2],...] used by the file formats.
  std::vector<std::vector<int>> to_index_lists() const;
  static WorkingModel from_index_lists(std::span<const std::vector<int>> lists);

  friend bool operator==(const WorkingModel&, const WorkingModel&) = default;

 private:
  std::vector<FactorSet> sets_;
};

// The contrast value g_K(z) = prod_{k in K} (2 z_k - 1); +1 for the empty set.
int contrast_value(FactorSet set, TreatmentLevel z);

// The Q x Q matrix G of contrast values, rows indexed by r(z) and columns by
// the (level, mask) subset order. Entries are computed on demand; a dense
// export is available for K <= kMaxDenseFactors.
class ContrastMatrix {
 public:
  explicit ContrastMatrix(int K);  // throws std::invalid_argument outside 1..kMaxFactors

  int factor_count() const { return K_; }
  std::size_t arm_count() const { return std::size_t{1} << K_; }

  const std::vector<FactorSet>& column_sets() const { return columns_; }
  std::size_t column_position(FactorSet s) const { return positions_[s.mask]; }

  int entry(TreatmentLevel z, FactorSet s) const { return contrast_value(s, z); }
  int entry(std::size_t row, std::size_t col) const;

  std::vector<double> column(FactorSet s) const;  // g_K by row index
  std::vector<std::int8_t> dense() const;         // row-major; K <= kMaxDenseFactors

 private:
  int K_;
  std::vector<FactorSet> columns_;
  std::vector<std::uint32_t> positions_;  // mask -> column position
};

ContrastMatrix contrast_matrix(int K);

// In-place unnormalized Walsh-Hadamard butterfly in natural index order.
void walsh_hadamard_inplace(std::span<double> values);

// tau = Q^{-1} G^T v for a vector indexed by r(z); the result covers all 2^K
// subsets in (level, mask) order. O(Q log Q).
std::vector<double> effect_transform(std::span<const double> arm_values, int K);

// v = G tau, the inverse of effect_transform (exact up to rounding).
std::vector<double> inverse_effect_transform(std::span<const double> effects, int K);

enum class Heredity { weak, strong };

// All level-d subsets admissible under the heredity principle given the
// selected level-(d-1) slice. For d == 1 every singleton is admissible.
std::vector<FactorSet> heredity_expand(std::span<const FactorSet> prev, int d,
                                       Heredity mode, int K);

// Iterated expansion: slices at levels d*+1 .. d*+depth where d* is the level
// of `base`. An empty base yields empty slices.
std::vector<std::vector<FactorSet>> heredity_closure(std::span<const FactorSet> base,
                                                     int depth, Heredity mode, int K);

}  // namespace factorial

#endif
