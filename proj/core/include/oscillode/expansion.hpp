#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "oscillode/deriv_engine.hpp"
#include "oscillode/freq_algebra.hpp"
#include "oscillode/ode_core.hpp"

namespace oscillode {

/// y' = f(y) + sum_m a_m(t) e^{i kappa_m omega t}, y(0) = y0.
struct Problem {
  std::string name;
  std::shared_ptr<const VectorField> field;
  std::vector<ForcingTerm> forcings;  // forcings[m-1] carries kappa_m
  CVector y0;
  FrequencySystem frequencies;

  /// Checks M >= 1, one forcing per base frequency, matching dimensions and
  /// pairwise distinct nonzero frequencies.
  Problem(std::string name, std::shared_ptr<const VectorField> field, std::vector<ForcingTerm> forcings,
          CVector y0, FrequencySystem frequencies);

  Eigen::Index dimension() const { return field->dimension(); }
  int forcing_count() const { return frequencies.count(); }
};

/// Operand of a term: coefficient p_{level,label}.
struct Operand {
  int level = 0;
  std::size_t label = 0;

  friend auto operator<=>(const Operand&, const Operand&) = default;
};

/// weight * f_n(p_{0,0})[operands...] with n = operands.size().
struct Term {
  std::vector<Operand> operands;  // sorted
  Rational weight;

  int order() const { return static_cast<int>(operands.size()); }
};

enum class NodeKind { kNonOscillatory, kForcing, kAlgebraic };

/// One coefficient p_{level,label}(t).
///
/// NonOscillatory: p' = sum of terms, solved as an ODE.
/// Forcing: a_m / (i kappa_m).
/// Algebraic: (sum of terms - p'_{level-1,label} if subtracts_derivative) / (i sigma).
struct CoefficientNode {
  int level = 0;
  std::size_t label = 0;
  NodeKind kind = NodeKind::kNonOscillatory;
  bool subtracts_derivative = false;
  int forcing = 0;  // 1..M for Forcing nodes
  std::vector<Term> terms;
};

/// Per-t coefficient values, independent of omega.
struct CoefficientSample {
  double t = 0.0;
  std::vector<std::vector<CVector>> values;  // values[r][label]
};

struct ChainOptions {
  /// Tight enough that the coefficient error stays below omega^{-4} terms at
  /// omega in the thousands.
  double abs_tol = 1e-14;
  double rel_tol = 1e-14;
  /// Cap on the coefficient step; 0 selects t_end / 1000.
  double max_step = 0.0;
  long max_steps = 50'000'000;
};

/// The coefficient table of a level-R expansion
/// y ~ p_{0,0} + sum_{r=1..R} omega^{-r} sum_{m in U_r} p_{r,m} e^{i sigma_m omega t}.
///
/// Label ids are global: U_r is a prefix of U_{r+1}, id 0 is the zero label
/// and ids 1..M are the base frequencies.
class Expansion {
 public:
  const Problem& problem() const { return *problem_; }
  std::shared_ptr<const Problem> problem_ptr() const { return problem_; }
  int order() const { return order_; }

  /// U_0..U_{R+1}.
  std::span<const IndexSet> index_sets() const { return index_sets_; }
  const FrequencyLabel& label(std::size_t id) const;
  /// Labels with a node at level r: {0} for r = 0, U_r otherwise.
  std::size_t labels_at(int level) const;

  std::span<const CoefficientNode> nodes() const { return nodes_; }
  std::optional<std::size_t> node_index(int level, std::size_t label) const;
  const CoefficientNode& node(int level, std::size_t label) const;

  bool solved() const { return chain_.has_value(); }
  double t_end() const;
  /// Coupled solution of every NonOscillatory node, levels stacked.
  const DenseSolution& chain_solution() const;

  /// Structured report per (r, label): kind, sigma, terms, initial value.
  std::string dump() const;

 private:
  friend Expansion build_expansion(std::shared_ptr<const Problem> problem, int order);
  friend void solve_nonoscillatory_chain(Expansion& expansion, double t_end, const ChainOptions& options);

  std::shared_ptr<const Problem> problem_;
  int order_ = 0;
  std::vector<IndexSet> index_sets_;
  std::vector<CoefficientNode> nodes_;
  std::vector<std::size_t> level_offset_;
  std::optional<DenseSolution> chain_;
};

/// Builds levels 0..R. Requires field differentials of order >= R and
/// amplitude derivatives of order >= R - 1; higher orders needed by a
/// particular evaluation are requested lazily and raise UnsupportedOrder.
Expansion build_expansion(std::shared_ptr<const Problem> problem, int order);

/// Number of build_expansion calls so far in this process.
long expansion_build_count();

/// Every node's value at t = 0, filled level by level with the zero-sum rule
/// for the NonOscillatory initial values. Needs no solve.
std::vector<CVector> initial_node_values(const Expansion& expansion);

/// Integrates all NonOscillatory nodes on [0, t_end]; each level's initial
/// value makes the level-r coefficients sum to zero at t = 0 (y0 at r = 0).
void solve_nonoscillatory_chain(Expansion& expansion, double t_end, const ChainOptions& options = {});

/// Time derivatives of every coefficient at one t, from the NonOscillatory
/// values at that t. Memoized; not thread safe, create one per thread.
class Evaluator {
 public:
  /// `chain` stacks p_{0,0}, p_{1,0}, ..., p_{R,0}.
  Evaluator(const Expansion& expansion, double t, const CVector& chain);

  /// j-th time derivative of node `index`.
  CVector derivative(std::size_t index, int j);
  CVector value(std::size_t index) { return derivative(index, 0); }

  /// j-th time derivative of weight-free f_n(p_{0,0})[operands].
  CVector term_derivative(std::span<const Operand> operands, int j);

 private:
  struct Atom {
    std::size_t node;
    int j;
    friend auto operator<=>(const Atom&, const Atom&) = default;
  };
  CVector multiterm(int n, std::vector<Atom> atoms, int j);
  CVector rhs_derivative(const CoefficientNode& node, int j);

  const Expansion& expansion_;
  double t_;
  CVector p00_;
  std::vector<std::vector<std::optional<CVector>>> memo_;
  std::map<std::tuple<int, int, std::vector<Atom>>, CVector> multiterm_memo_;
};

CVector coefficient_value(const Expansion& expansion, int level, std::size_t label, double t);
CVector coefficient_derivative(const Expansion& expansion, int level, std::size_t label, double t);

/// Every coefficient value at t. Throws OutOfDomain outside the solved span.
CoefficientSample sample_coefficients(const Expansion& expansion, double t);

/// p_{0,0} + sum_{r=1..s} omega^{-r} sum_m p_{r,m} e^{i sigma_m omega t}.
CVector combine(const Expansion& expansion, const CoefficientSample& sample, double omega, int s);

CVector evaluate_truncated(const Expansion& expansion, double t, double omega, int s);

}  // namespace oscillode
