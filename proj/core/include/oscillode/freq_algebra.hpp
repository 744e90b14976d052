#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oscillode/rational.hpp"

namespace oscillode {

enum class FrequencyMode { kExact, kFloat };

/// One element b_k of a basis of rationally independent reals, e.g. {"1", 1.0}
/// or {"√2", 1.4142...}.
struct BasisElement {
  std::string name;
  double value = 0.0;
};

/// A real frequency. In exact mode it is a rational coordinate vector over the
/// basis (the float value is derived from it); in float mode only `value` is
/// meaningful and `coordinates` is empty.
struct Frequency {
  std::vector<Rational> coordinates;
  double value = 0.0;
};

/// The number field the frequencies live in, and the equality rule on it.
class FrequencyBasis {
 public:
  static FrequencyBasis exact(std::vector<BasisElement> elements);
  static FrequencyBasis floating(double tolerance = 1e-9);

  FrequencyMode mode() const { return mode_; }
  double tolerance() const { return tolerance_; }
  const std::vector<BasisElement>& elements() const { return elements_; }

  Frequency make(std::vector<Rational> coordinates) const;
  Frequency make(double value) const;
  Frequency zero() const;

  Frequency add(const Frequency& a, const Frequency& b) const;
  bool equal(const Frequency& a, const Frequency& b) const;
  bool is_zero(const Frequency& f) const;

  /// Exact expression such as "-1 - √2", "2√2", "0". Float mode prints the
  /// value with 17 significant digits.
  std::string format(const Frequency& f) const;

 private:
  FrequencyMode mode_ = FrequencyMode::kExact;
  double tolerance_ = 0.0;
  std::vector<BasisElement> elements_;
};

/// A frequency label: the multiset of base-frequency indices whose sum gives
/// sigma. The zero label has no indices.
struct FrequencyLabel {
  std::vector<int> counts;  // counts[m-1] = occurrences of kappa_m
  std::vector<int> tuple;   // sorted indices in 1..M
  Frequency sigma;

  bool is_zero() const { return tuple.empty(); }
  /// "0", "3", "(1, 2)".
  std::string name() const;
};

/// Nondecreasing partition of `total` with its count of distinct orderings.
struct Partition {
  std::vector<int> parts;
  std::int64_t theta = 1;
};

/// Frequencies present at one amplitude level, in the canonical order: zero,
/// then singletons, pairs, triplets, each block lexicographic.
struct IndexSet {
  int level = 0;
  std::vector<FrequencyLabel> labels;

  std::size_t size() const { return labels.size(); }
};

/// Base frequencies kappa_1..kappa_M over a basis, plus the small-denominator
/// threshold used when new frequencies are generated.
class FrequencySystem {
 public:
  /// delta_min defaults to 1e-8 * max_m |kappa_m|.
  FrequencySystem(FrequencyBasis basis, std::vector<Frequency> kappas,
                  std::optional<double> delta_min = std::nullopt);

  const FrequencyBasis& basis() const { return basis_; }
  int count() const { return static_cast<int>(kappas_.size()) - 1; }
  /// kappa(0) is the zero frequency; kappa(1..M) the base frequencies.
  const Frequency& kappa(int m) const;
  double delta_min() const { return delta_min_; }

  Frequency sum(std::span<const int> indices) const;

  /// Strips zeros and sorts; the zero label when the indices sum to zero.
  FrequencyLabel canonicalize(std::span<const int> indices) const;

  /// Number of distinct orderings of `source` (indices in 0..M, kappa_0 = 0)
  /// whose kappa-sum equals target.sigma; zero if the sum does not match.
  std::int64_t rho(const FrequencyLabel& target, std::span<const int> source) const;

  double sigma_value(const FrequencyLabel& label) const { return label.sigma.value; }

  /// Position of the label carrying `sigma` in `set`, if any.
  std::optional<std::size_t> find(const IndexSet& set, const Frequency& sigma) const;

 private:
  FrequencyBasis basis_;
  std::vector<Frequency> kappas_;  // kappas_[0] == zero
  double delta_min_;
};

/// I_{n,total}: nondecreasing tuples of n positive integers summing to total.
/// Throws std::invalid_argument unless 1 <= n <= total.
std::vector<Partition> ordered_partitions(int n, int total);

/// I^o_{n,total}: every ordered tuple of n positive integers summing to total.
std::vector<std::vector<int>> compositions(int n, int total);

/// Number of distinct orderings of a multiset.
std::int64_t distinct_permutations(std::span<const int> items);

/// U_0 = {1..M}.
IndexSet base_index_set(const FrequencySystem& system);

/// U_{r+1} from the chain U_0..U_r. For r = 0 this is {0} ∪ U_0; otherwise
/// every sum of sigmas over (l, k) with l in I_{n,r}, k_i in U_{l_i} that is
/// not already present is appended. Throws SmallDenominator for a new nonzero
/// frequency with magnitude below the system's threshold.
IndexSet extend_index_set(std::span<const IndexSet> chain, const FrequencySystem& system);

/// U_0..U_{last}.
std::vector<IndexSet> build_index_chain(const FrequencySystem& system, int last);

/// Text table with one row per label: name, exact sigma, float sigma and the
/// nonzero rho counts for sorted source tuples of length `rho_length`.
std::string format_index_table(const FrequencySystem& system, const IndexSet& set, int rho_length);

}  // namespace oscillode
