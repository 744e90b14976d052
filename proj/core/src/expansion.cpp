#include "oscillode/expansion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {
namespace {

std::atomic<long> build_counter{0};

Rational inverse_factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return Rational(1, f);
}

std::size_t find_label(const FrequencySystem& system, const IndexSet& set, const Frequency& sigma) {
  if (system.basis().is_zero(sigma)) return 0;
  const auto found = system.find(set, sigma);
  if (!found) throw std::logic_error("combination frequency missing from the next index set");
  return *found;
}

// Groups the level-r right-hand side by frequency: target label id -> merged
// operand multiset -> summed weight. Every ordered (levels, labels) pair
// contributes 1/n!.
using TermGroups = std::map<std::size_t, std::map<std::vector<Operand>, Rational>>;

TermGroups level_terms(const FrequencySystem& system, std::span<const IndexSet> sets, int r) {
  const FrequencyBasis& basis = system.basis();
  const IndexSet& next = sets[static_cast<std::size_t>(r + 1)];
  const auto& labels = next.labels;
  TermGroups groups;
  for (int n = 1; n <= r; ++n) {
    const Rational weight = inverse_factorial(n);
    for (const std::vector<int>& levels : compositions(n, r)) {
      std::vector<std::size_t> limits;
      for (int level : levels) limits.push_back(sets[static_cast<std::size_t>(level)].size());
      std::vector<std::size_t> odometer(static_cast<std::size_t>(n), 0);
      while (true) {
        Frequency sigma = basis.zero();
        std::vector<Operand> operands;
        for (std::size_t i = 0; i < odometer.size(); ++i) {
          sigma = basis.add(sigma, labels[odometer[i]].sigma);
          operands.push_back({levels[i], odometer[i]});
        }
        std::sort(operands.begin(), operands.end());
        const std::size_t target = find_label(system, next, sigma);
        auto& slot = groups[target][operands];
        slot = slot + weight;

        std::size_t i = 0;
        for (; i < odometer.size(); ++i) {
          if (++odometer[i] < limits[i]) break;
          odometer[i] = 0;
        }
        if (i == odometer.size()) break;
      }
    }
  }
  return groups;
}

std::vector<Term> to_terms(const TermGroups& groups, std::size_t label) {
  std::vector<Term> terms;
  const auto it = groups.find(label);
  if (it == groups.end()) return terms;
  for (const auto& [operands, weight] : it->second) terms.push_back({operands, weight});
  return terms;
}

std::string format_vector(const CVector& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Adding 0.0 folds -0 into 0 so dumps do not depend on signed zeros.
    parts.push_back(fmt::format("{:.12g}{:+.12g}i", v[i].real() + 0.0, v[i].imag() + 0.0));
  }
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kNonOscillatory: return "non-oscillatory";
    case NodeKind::kForcing: return "forcing";
    case NodeKind::kAlgebraic: return "algebraic";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------

Problem::Problem(std::string name_, std::shared_ptr<const VectorField> field_, std::vector<ForcingTerm> forcings_,
                 CVector y0_, FrequencySystem frequencies_)
    : name(std::move(name_)),
      field(std::move(field_)),
      forcings(std::move(forcings_)),
      y0(std::move(y0_)),
      frequencies(std::move(frequencies_)) {
  if (!field) throw std::invalid_argument("problem needs a vector field");
  const int M = frequencies.count();
  if (M < 1) throw std::invalid_argument("problem needs at least one forcing");
  if (static_cast<int>(forcings.size()) != M) {
    throw std::invalid_argument(fmt::format("{} forcings for {} base frequencies", forcings.size(), M));
  }
  for (int m = 1; m <= M; ++m) {
    const ForcingTerm& forcing = forcings[static_cast<std::size_t>(m - 1)];
    if (forcing.frequency_index() != m) {
      throw std::invalid_argument(fmt::format("forcing {} is attached to frequency {}", m, forcing.frequency_index()));
    }
    if (forcing.amplitude(0.0).size() != field->dimension()) {
      throw std::invalid_argument(fmt::format("forcing {} has the wrong dimension", m));
    }
    for (int k = 1; k < m; ++k) {
      if (frequencies.basis().equal(frequencies.kappa(k), frequencies.kappa(m))) {
        throw std::invalid_argument(
            fmt::format("base frequencies {} and {} coincide; merge their forcings first", k, m));
      }
    }
  }
  if (y0.size() != field->dimension()) throw std::invalid_argument("y0 has the wrong dimension");
}

// ---------------------------------------------------------------------------

const FrequencyLabel& Expansion::label(std::size_t id) const {
  const auto& labels = index_sets_.back().labels;
  if (id >= labels.size()) throw std::out_of_range(fmt::format("no label {}", id));
  return labels[id];
}

std::size_t Expansion::labels_at(int level) const {
  if (level < 0 || level > order_) throw std::out_of_range(fmt::format("no level {}", level));
  return level == 0 ? 1 : index_sets_[static_cast<std::size_t>(level)].size();
}

std::optional<std::size_t> Expansion::node_index(int level, std::size_t label) const {
  if (level < 0 || level > order_ || label >= labels_at(level)) return std::nullopt;
  return level_offset_[static_cast<std::size_t>(level)] + label;
}

const CoefficientNode& Expansion::node(int level, std::size_t label) const {
  const auto index = node_index(level, label);
  if (!index) throw std::out_of_range(fmt::format("no coefficient at level {} label {}", level, label));
  return nodes_[*index];
}

double Expansion::t_end() const { return chain_solution().t_end(); }

const DenseSolution& Expansion::chain_solution() const {
  if (!chain_) throw std::logic_error("non-oscillatory chain not solved yet");
  return *chain_;
}

std::string Expansion::dump() const {
  const FrequencyBasis& basis = problem_->frequencies.basis();
  const std::vector<CVector> initial = initial_node_values(*this);
  std::string out = fmt::format("# expansion {} R={} M={} d={}\n", problem_->name, order_,
                                problem_->forcing_count(), problem_->dimension());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const CoefficientNode& node = nodes_[i];
    const FrequencyLabel& lab = label(node.label);
    out += fmt::format("node ({}, {}) kind={} sigma={} sigma_float={:.17g}\n", node.level, lab.name(),
                       kind_name(node.kind), basis.format(lab.sigma), lab.sigma.value);
    if (node.kind == NodeKind::kForcing) out += fmt::format("  amplitude a_{} / (i sigma)\n", node.forcing);
    if (node.kind == NodeKind::kAlgebraic) {
      out += "  divided by i sigma\n";
      if (node.subtracts_derivative) out += fmt::format("  minus d/dt p_{{{},{}}}\n", node.level - 1, lab.name());
    }
    for (const Term& term : node.terms) {
      std::vector<std::string> operands;
      for (const Operand& op : term.operands) operands.push_back(fmt::format("p_{{{},{}}}", op.level, label(op.label).name()));
      out += fmt::format("  term {} f_{}[{}]\n", term.weight.to_string(), term.order(), fmt::join(operands, ", "));
    }
    out += fmt::format("  value(0) = {}\n", format_vector(initial[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------

Expansion build_expansion(std::shared_ptr<const Problem> problem, int order) {
  if (!problem) throw std::invalid_argument("build_expansion needs a problem");
  if (order < 0) throw std::invalid_argument("truncation order must be nonnegative");
  if (problem->field->max_order() < order) {
    throw UnsupportedOrder(fmt::format("level-{} expansion needs differentials up to order {}, field provides {}",
                                       order, order, problem->field->max_order()));
  }
  for (const ForcingTerm& forcing : problem->forcings) {
    if (order >= 1 && forcing.max_derivative_order() < order - 1) {
      throw UnsupportedOrder(fmt::format("level-{} expansion needs amplitude derivatives up to order {}, forcing {} "
                                         "provides {}",
                                         order, order - 1, forcing.frequency_index(), forcing.max_derivative_order()));
    }
  }

  ++build_counter;
  Expansion expansion;
  expansion.problem_ = problem;
  expansion.order_ = order;
  const FrequencySystem& system = problem->frequencies;
  expansion.index_sets_ = build_index_chain(system, order + 1);
  const auto& sets = expansion.index_sets_;

  // level 0: p_{0,0}' = f(p_{0,0})
  expansion.level_offset_.push_back(0);
  expansion.nodes_.push_back({0, 0, NodeKind::kNonOscillatory, false, 0, {Term{{}, Rational(1)}}});

  TermGroups previous;
  for (int r = 1; r <= order; ++r) {
    expansion.level_offset_.push_back(expansion.nodes_.size());
    TermGroups current = level_terms(system, sets, r);
    const std::size_t count = sets[static_cast<std::size_t>(r)].size();
    const std::size_t previous_count = r >= 2 ? sets[static_cast<std::size_t>(r - 1)].size() : 0;
    for (std::size_t m = 0; m < count; ++m) {
      CoefficientNode node;
      node.level = r;
      node.label = m;
      if (m == 0) {
        node.kind = NodeKind::kNonOscillatory;
        node.terms = to_terms(current, 0);
      } else if (r == 1) {
        node.kind = NodeKind::kForcing;
        node.forcing = static_cast<int>(m);
      } else {
        node.kind = NodeKind::kAlgebraic;
        node.subtracts_derivative = m < previous_count;
        node.terms = to_terms(previous, m);
      }
      expansion.nodes_.push_back(std::move(node));
    }
    previous = std::move(current);
  }
  return expansion;
}

long expansion_build_count() { return build_counter.load(); }

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const Expansion& expansion, double t, const CVector& chain)
    : expansion_(expansion), t_(t) {
  const Eigen::Index d = expansion.problem().dimension();
  const int R = expansion.order();
  if (chain.size() != d * (R + 1)) throw std::invalid_argument("chain state has the wrong size");
  p00_ = chain.segment(0, d);
  const std::size_t depth = static_cast<std::size_t>(R) + 4;
  memo_.assign(expansion.nodes().size(), std::vector<std::optional<CVector>>(depth));
  for (int r = 0; r <= R; ++r) {
    memo_[*expansion.node_index(r, 0)][0] = chain.segment(r * d, d);
  }
}

CVector Evaluator::derivative(std::size_t index, int j) {
  if (j < 0) throw std::invalid_argument("negative derivative order");
  auto& row = memo_.at(index);
  if (static_cast<std::size_t>(j) >= row.size()) {
    throw UnsupportedOrder(fmt::format("time derivative of order {} exceeds the evaluator depth", j));
  }
  if (row[static_cast<std::size_t>(j)]) return *row[static_cast<std::size_t>(j)];

  const CoefficientNode& node = expansion_.nodes()[index];
  const Problem& problem = expansion_.problem();
  CVector result;
  switch (node.kind) {
    case NodeKind::kNonOscillatory:
      result = rhs_derivative(node, j - 1);
      break;
    case NodeKind::kForcing: {
      const double kappa = problem.frequencies.kappa(node.forcing).value;
      result = problem.forcings[static_cast<std::size_t>(node.forcing - 1)].derivative(j, t_) / Complex(0.0, kappa);
      break;
    }
    case NodeKind::kAlgebraic: {
      const double sigma = expansion_.label(node.label).sigma.value;
      result = rhs_derivative(node, j);
      if (node.subtracts_derivative) {
        result -= derivative(*expansion_.node_index(node.level - 1, node.label), j + 1);
      }
      result /= Complex(0.0, sigma);
      break;
    }
  }
  row[static_cast<std::size_t>(j)] = result;
  return result;
}

CVector Evaluator::rhs_derivative(const CoefficientNode& node, int j) {
  CVector total = CVector::Zero(p00_.size());
  for (const Term& term : node.terms) total += term.weight.to_double() * term_derivative(term.operands, j);
  return total;
}

CVector Evaluator::term_derivative(std::span<const Operand> operands, int j) {
  std::vector<Atom> atoms;
  atoms.reserve(operands.size());
  for (const Operand& op : operands) {
    const auto index = expansion_.node_index(op.level, op.label);
    if (!index) throw std::out_of_range("term operand has no coefficient node");
    atoms.push_back({*index, 0});
  }
  return multiterm(static_cast<int>(operands.size()), std::move(atoms), j);
}

// D^j f_n(p00)[atoms] = D^{j-1} f_{n+1}(p00)[p00', atoms] + sum_i D^{j-1} f_n(p00)[.., atom_i', ..]
CVector Evaluator::multiterm(int n, std::vector<Atom> atoms, int j) {
  std::sort(atoms.begin(), atoms.end());
  auto key = std::make_tuple(n, j, atoms);
  if (const auto it = multiterm_memo_.find(key); it != multiterm_memo_.end()) return it->second;

  CVector result;
  if (j == 0) {
    std::vector<CVector> directions;
    directions.reserve(atoms.size());
    bool vanishes = false;
    for (const Atom& atom : atoms) {
      directions.push_back(derivative(atom.node, atom.j));
      if (directions.back().isZero(0.0)) vanishes = true;
    }
    if (vanishes) {
      result = CVector::Zero(p00_.size());
    } else {
      result = expansion_.problem().field->differential(p00_, directions);
    }
  } else {
    std::vector<Atom> grown = atoms;
    grown.push_back({0, 1});
    result = multiterm(n + 1, std::move(grown), j - 1);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (i > 0 && atoms[i] == atoms[i - 1]) {
        // identical atoms give identical contributions
        continue;
      }
      std::size_t multiplicity = 1;
      while (i + multiplicity < atoms.size() && atoms[i + multiplicity] == atoms[i]) ++multiplicity;
      std::vector<Atom> bumped = atoms;
      ++bumped[i].j;
      result += static_cast<double>(multiplicity) * multiterm(n, std::move(bumped), j - 1);
    }
  }
  multiterm_memo_.emplace(std::move(key), result);
  return result;
}

// ---------------------------------------------------------------------------

std::vector<CVector> initial_node_values(const Expansion& expansion) {
  const Problem& problem = expansion.problem();
  const Eigen::Index d = problem.dimension();
  const int R = expansion.order();
  CVector chain = CVector::Zero(d * (R + 1));
  chain.segment(0, d) = problem.y0;

  std::vector<CVector> values(expansion.nodes().size());
  values[0] = problem.y0;
  for (int r = 1; r <= R; ++r) {
    // level-r oscillatory nodes depend only on levels below r
    Evaluator evaluator(expansion, 0.0, chain);
    CVector sum = CVector::Zero(d);
    for (std::size_t m = 1; m < expansion.labels_at(r); ++m) {
      const std::size_t index = *expansion.node_index(r, m);
      values[index] = evaluator.value(index);
      sum += values[index];
    }
    chain.segment(r * d, d) = -sum;
    values[*expansion.node_index(r, 0)] = -sum;
  }
  return values;
}

void solve_nonoscillatory_chain(Expansion& expansion, double t_end, const ChainOptions& options) {
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  const Problem& problem = expansion.problem();
  const Eigen::Index d = problem.dimension();
  const int R = expansion.order();

  const std::vector<CVector> initial = initial_node_values(expansion);
  CVector y0(d * (R + 1));
  for (int r = 0; r <= R; ++r) y0.segment(r * d, d) = initial[*expansion.node_index(r, 0)];

  const Expansion& view = expansion;
  IvpSpec spec;
  spec.y0 = y0;
  spec.t_begin = 0.0;
  spec.t_end = t_end;
  spec.abs_tol = options.abs_tol;
  spec.rel_tol = options.rel_tol;
  spec.max_steps = options.max_steps;
  spec.max_step = options.max_step > 0.0 ? options.max_step : t_end / 1000.0;
  spec.rhs = [&view, d, R](double t, const CVector& y) {
    Evaluator evaluator(view, t, y);
    CVector f(y.size());
    for (int r = 0; r <= R; ++r) f.segment(r * d, d) = evaluator.derivative(*view.node_index(r, 0), 1);
    return f;
  };
  auto second = [&view, d, R](double t, const CVector& y, const CVector&) {
    Evaluator evaluator(view, t, y);
    CVector g(y.size());
    for (int r = 0; r <= R; ++r) g.segment(r * d, d) = evaluator.derivative(*view.node_index(r, 0), 2);
    return g;
  };
  // quintic dense output when the field and amplitudes reach one order higher
  try {
    second(0.0, y0, y0);
    spec.second_derivative = second;
  } catch (const UnsupportedOrder&) {
  }

  try {
    expansion.chain_ = integrate(spec);
  } catch (const StepUnderflow& e) {
    throw SolverFailure(fmt::format("non-oscillatory chain p_{{0,0}}..p_{{{},0}} of {}: {}", R, problem.name, e.what()));
  } catch (const MaxStepsExceeded& e) {
    throw SolverFailure(fmt::format("non-oscillatory chain p_{{0,0}}..p_{{{},0}} of {}: {}", R, problem.name, e.what()));
  }
}

// ---------------------------------------------------------------------------

CVector coefficient_value(const Expansion& expansion, int level, std::size_t label, double t) {
  const auto index = expansion.node_index(level, label);
  if (!index) throw std::out_of_range(fmt::format("no coefficient at level {} label {}", level, label));
  Evaluator evaluator(expansion, t, expansion.chain_solution().sample(t));
  return evaluator.value(*index);
}

CVector coefficient_derivative(const Expansion& expansion, int level, std::size_t label, double t) {
  const auto index = expansion.node_index(level, label);
  if (!index) throw std::out_of_range(fmt::format("no coefficient at level {} label {}", level, label));
  Evaluator evaluator(expansion, t, expansion.chain_solution().sample(t));
  return evaluator.derivative(*index, 1);
}

CoefficientSample sample_coefficients(const Expansion& expansion, double t) {
  Evaluator evaluator(expansion, t, expansion.chain_solution().sample(t));
  CoefficientSample sample;
  sample.t = t;
  for (int r = 0; r <= expansion.order(); ++r) {
    std::vector<CVector> level;
    for (std::size_t m = 0; m < expansion.labels_at(r); ++m) level.push_back(evaluator.value(*expansion.node_index(r, m)));
    sample.values.push_back(std::move(level));
  }
  return sample;
}

CVector combine(const Expansion& expansion, const CoefficientSample& sample, double omega, int s) {
  if (s < 0 || s > expansion.order()) {
    throw std::invalid_argument(fmt::format("truncation s = {} outside 0..{}", s, expansion.order()));
  }
  if (static_cast<int>(sample.values.size()) <= s) throw std::invalid_argument("coefficient sample too shallow");
  CVector result = sample.values[0][0];
  double scale = 1.0;
  for (int r = 1; r <= s; ++r) {
    scale /= omega;
    CVector level = CVector::Zero(result.size());
    const auto& values = sample.values[static_cast<std::size_t>(r)];
    for (std::size_t m = 0; m < values.size(); ++m) {
      level += values[m] * oscillation(expansion.label(m).sigma.value, omega, sample.t);
    }
    result += scale * level;
  }
  return result;
}

CVector evaluate_truncated(const Expansion& expansion, double t, double omega, int s) {
  return combine(expansion, sample_coefficients(expansion, t), omega, s);
}

}  // namespace oscillode
