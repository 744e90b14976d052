#include "oscillode/freq_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {

// ---------------------------------------------------------------------------
// FrequencyBasis

FrequencyBasis FrequencyBasis::exact(std::vector<BasisElement> elements) {
  if (elements.empty()) throw std::invalid_argument("frequency basis needs at least one element");
  FrequencyBasis basis;
  basis.mode_ = FrequencyMode::kExact;
  basis.elements_ = std::move(elements);
  return basis;
}

FrequencyBasis FrequencyBasis::floating(double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("float-mode tolerance must be positive");
  FrequencyBasis basis;
  basis.mode_ = FrequencyMode::kFloat;
  basis.tolerance_ = tolerance;
  basis.elements_ = {{"1", 1.0}};
  return basis;
}

Frequency FrequencyBasis::make(std::vector<Rational> coordinates) const {
  if (mode_ != FrequencyMode::kExact) {
    throw std::invalid_argument("coordinate frequencies require an exact basis");
  }
  if (coordinates.size() != elements_.size()) {
    throw std::invalid_argument(fmt::format("frequency has {} coordinates, basis has {}",
                                            coordinates.size(), elements_.size()));
  }
  long double value = 0.0L;
  for (std::size_t k = 0; k < coordinates.size(); ++k) {
    value += coordinates[k].to_long_double() * static_cast<long double>(elements_[k].value);
  }
  return Frequency{std::move(coordinates), static_cast<double>(value)};
}

Frequency FrequencyBasis::make(double value) const {
  if (mode_ != FrequencyMode::kFloat) {
    throw std::invalid_argument("bare float frequencies require a float basis");
  }
  return Frequency{{}, value};
}

Frequency FrequencyBasis::zero() const {
  if (mode_ == FrequencyMode::kFloat) return Frequency{{}, 0.0};
  return Frequency{std::vector<Rational>(elements_.size()), 0.0};
}

Frequency FrequencyBasis::add(const Frequency& a, const Frequency& b) const {
  if (mode_ == FrequencyMode::kFloat) return Frequency{{}, a.value + b.value};
  std::vector<Rational> coords(elements_.size());
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = a.coordinates[k] + b.coordinates[k];
  return make(std::move(coords));
}

bool FrequencyBasis::equal(const Frequency& a, const Frequency& b) const {
  if (mode_ == FrequencyMode::kFloat) return std::abs(a.value - b.value) <= tolerance_;
  return a.coordinates == b.coordinates;
}

bool FrequencyBasis::is_zero(const Frequency& f) const {
  if (mode_ == FrequencyMode::kFloat) return std::abs(f.value) <= tolerance_;
  return std::all_of(f.coordinates.begin(), f.coordinates.end(),
                     [](const Rational& q) { return q.is_zero(); });
}

std::string FrequencyBasis::format(const Frequency& f) const {
  if (mode_ == FrequencyMode::kFloat) return fmt::format("{:.17g}", f.value);

  std::string out;
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const Rational& q = f.coordinates[k];
    if (q.is_zero()) continue;
    const bool negative = q < Rational(0);
    const Rational magnitude = negative ? -q : q;
    const std::string& name = elements_[k].name;

    std::string term;
    if (name == "1") {
      term = magnitude.to_string();
    } else if (magnitude == Rational(1)) {
      term = name;
    } else if (magnitude.denominator() == 1) {
      term = magnitude.to_string() + name;
    } else {
      term = "(" + magnitude.to_string() + ")" + name;
    }

    if (out.empty()) {
      out = negative ? "-" + term : term;
    } else {
      out += negative ? " - " : " + ";
      out += term;
    }
  }
  return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------------------
// FrequencyLabel

std::string FrequencyLabel::name() const {
  if (tuple.empty()) return "0";
  if (tuple.size() == 1) return std::to_string(tuple.front());
  return fmt::format("({})", fmt::join(tuple, ", "));
}

// ---------------------------------------------------------------------------
// FrequencySystem

FrequencySystem::FrequencySystem(FrequencyBasis basis, std::vector<Frequency> kappas,
                                 std::optional<double> delta_min)
    : basis_(std::move(basis)) {
  if (kappas.empty()) throw std::invalid_argument("at least one base frequency is required");
  kappas_.reserve(kappas.size() + 1);
  kappas_.push_back(basis_.zero());
  double largest = 0.0;
  for (std::size_t m = 0; m < kappas.size(); ++m) {
    Frequency& kappa = kappas[m];
    if (basis_.mode() == FrequencyMode::kExact) {
      kappa = basis_.make(kappa.coordinates);  // validates size, refreshes value
    }
    if (basis_.is_zero(kappa)) {
      throw std::invalid_argument(fmt::format("base frequency kappa_{} is zero", m + 1));
    }
    largest = std::max(largest, std::abs(kappa.value));
    kappas_.push_back(std::move(kappa));
  }
  delta_min_ = delta_min.value_or(1e-8 * largest);
  if (delta_min_ < 0.0) throw std::invalid_argument("delta_min must be nonnegative");
}

const Frequency& FrequencySystem::kappa(int m) const {
  if (m < 0 || m > count()) throw std::out_of_range(fmt::format("no base frequency {}", m));
  return kappas_[static_cast<std::size_t>(m)];
}

Frequency FrequencySystem::sum(std::span<const int> indices) const {
  Frequency total = basis_.zero();
  for (int m : indices) total = basis_.add(total, kappa(m));
  return total;
}

FrequencyLabel FrequencySystem::canonicalize(std::span<const int> indices) const {
  FrequencyLabel label;
  label.counts.assign(static_cast<std::size_t>(count()), 0);
  label.sigma = sum(indices);
  if (basis_.is_zero(label.sigma)) {
    label.sigma = basis_.zero();
    return label;
  }
  for (int m : indices) {
    if (m == 0) continue;
    label.tuple.push_back(m);
    ++label.counts[static_cast<std::size_t>(m - 1)];
  }
  std::sort(label.tuple.begin(), label.tuple.end());
  return label;
}

std::int64_t FrequencySystem::rho(const FrequencyLabel& target, std::span<const int> source) const {
  if (!basis_.equal(sum(source), target.sigma)) return 0;
  return distinct_permutations(source);
}

std::optional<std::size_t> FrequencySystem::find(const IndexSet& set, const Frequency& sigma) const {
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    if (basis_.equal(set.labels[i].sigma, sigma)) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Partitions

namespace {

std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void partitions_rec(int remaining, int slots, int min_part, std::vector<int>& current,
                    std::vector<Partition>& out) {
  if (slots == 0) {
    if (remaining == 0) out.push_back({current, distinct_permutations(current)});
    return;
  }
  for (int part = min_part; part * slots <= remaining; ++part) {
    current.push_back(part);
    partitions_rec(remaining - part, slots - 1, part, current, out);
    current.pop_back();
  }
}

void compositions_rec(int remaining, int slots, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (slots == 0) {
    if (remaining == 0) out.push_back(current);
    return;
  }
  for (int part = 1; part <= remaining - (slots - 1); ++part) {
    current.push_back(part);
    compositions_rec(remaining - part, slots - 1, current, out);
    current.pop_back();
  }
}

bool label_order(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

std::int64_t distinct_permutations(std::span<const int> items) {
  std::map<int, int> multiplicity;
  for (int v : items) ++multiplicity[v];
  std::int64_t result = factorial(static_cast<int>(items.size()));
  for (const auto& [value, count] : multiplicity) result /= factorial(count);
  return result;
}

std::vector<Partition> ordered_partitions(int n, int total) {
  if (n < 1 || n > total) {
    throw std::invalid_argument(fmt::format("invalid-range: need 1 <= n <= r, got n={}, r={}", n, total));
  }
  std::vector<Partition> out;
  std::vector<int> current;
  partitions_rec(total, n, 1, current, out);
  return out;
}

std::vector<std::vector<int>> compositions(int n, int total) {
  if (n < 1 || n > total) {
    throw std::invalid_argument(fmt::format("invalid-range: need 1 <= n <= r, got n={}, r={}", n, total));
  }
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  compositions_rec(total, n, current, out);
  return out;
}

// ---------------------------------------------------------------------------
// Index sets

IndexSet base_index_set(const FrequencySystem& system) {
  IndexSet set;
  set.level = 0;
  for (int m = 1; m <= system.count(); ++m) {
    const int index[] = {m};
    set.labels.push_back(system.canonicalize(index));
  }
  return set;
}

IndexSet extend_index_set(std::span<const IndexSet> chain, const FrequencySystem& system) {
  if (chain.empty()) throw std::invalid_argument("index chain must contain U_0");
  const int r = static_cast<int>(chain.size()) - 1;
  const FrequencyBasis& basis = system.basis();

  IndexSet next;
  next.level = r + 1;
  if (r == 0) {
    next.labels.push_back(system.canonicalize(std::span<const int>{}));
    for (const FrequencyLabel& label : chain[0].labels) {
      if (system.find(next, label.sigma)) {
        throw std::invalid_argument("base frequencies must be pairwise distinct: " + label.name());
      }
      next.labels.push_back(label);
    }
    return next;
  }

  next.labels = chain[static_cast<std::size_t>(r)].labels;
  if (next.labels.empty() || !next.labels.front().is_zero()) {
    throw std::invalid_argument("U_r must start with the zero label for r >= 1");
  }

  struct Candidate {
    Frequency sigma;
    std::vector<int> tuple;
  };
  std::vector<Candidate> fresh;

  for (int n = 1; n <= r; ++n) {
    for (const Partition& partition : ordered_partitions(n, r)) {
      std::vector<const IndexSet*> sets;
      for (int level : partition.parts) sets.push_back(&chain[static_cast<std::size_t>(level)]);

      std::vector<std::size_t> odometer(static_cast<std::size_t>(n), 0);
      while (true) {
        Frequency sigma = basis.zero();
        std::vector<int> tuple;
        for (std::size_t i = 0; i < odometer.size(); ++i) {
          const FrequencyLabel& operand = sets[i]->labels[odometer[i]];
          sigma = basis.add(sigma, operand.sigma);
          tuple.insert(tuple.end(), operand.tuple.begin(), operand.tuple.end());
        }
        std::sort(tuple.begin(), tuple.end());

        if (!basis.is_zero(sigma) && !system.find(next, sigma)) {
          if (std::abs(sigma.value) < system.delta_min()) {
            throw SmallDenominator(
                fmt::format("small denominator: combination ({}) has |sigma| = {:.3e} below delta_min = {:.3e}",
                            fmt::join(tuple, ", "), std::abs(sigma.value), system.delta_min()),
                tuple, std::abs(sigma.value));
          }
          auto it = std::find_if(fresh.begin(), fresh.end(),
                                 [&](const Candidate& c) { return basis.equal(c.sigma, sigma); });
          if (it == fresh.end()) {
            fresh.push_back({sigma, tuple});
          } else if (label_order(tuple, it->tuple)) {
            it->tuple = tuple;
          }
        }

        std::size_t i = 0;
        for (; i < odometer.size(); ++i) {
          if (++odometer[i] < sets[i]->labels.size()) break;
          odometer[i] = 0;
        }
        if (i == odometer.size()) break;
      }
    }
  }

  std::sort(fresh.begin(), fresh.end(),
            [](const Candidate& a, const Candidate& b) { return label_order(a.tuple, b.tuple); });
  for (const Candidate& c : fresh) next.labels.push_back(system.canonicalize(c.tuple));
  return next;
}

std::vector<IndexSet> build_index_chain(const FrequencySystem& system, int last) {
  if (last < 0) throw std::invalid_argument("index chain length must be nonnegative");
  std::vector<IndexSet> chain;
  chain.push_back(base_index_set(system));
  while (static_cast<int>(chain.size()) <= last) chain.push_back(extend_index_set(chain, system));
  return chain;
}

std::string format_index_table(const FrequencySystem& system, const IndexSet& set, int rho_length) {
  const int M = system.count();
  // all nondecreasing tuples over {0..M} of the requested length
  std::vector<std::vector<int>> sources;
  if (rho_length > 0) {
    std::vector<int> current(static_cast<std::size_t>(rho_length), 0);
    while (true) {
      sources.push_back(current);
      int i = rho_length - 1;
      while (i >= 0 && current[static_cast<std::size_t>(i)] == M) --i;
      if (i < 0) break;
      const int value = current[static_cast<std::size_t>(i)] + 1;
      for (int j = i; j < rho_length; ++j) current[static_cast<std::size_t>(j)] = value;
    }
  }

  std::string out = fmt::format("# U_{}: {} labels\n", set.level, set.size());
  out += "m | sigma | sigma_float | rho\n";
  for (const FrequencyLabel& label : set.labels) {
    const std::string target = label.is_zero() ? "0" : fmt::format("{}", fmt::join(label.tuple, ","));
    std::vector<std::string> records;
    for (const auto& source : sources) {
      const std::int64_t count = system.rho(label, source);
      if (count == 0) continue;
      records.push_back(fmt::format("rho^{{{}}}_{{{}}} = {}", target, fmt::join(source, ","), count));
    }
    out += fmt::format("{} | {} | {:.17g} | {}\n", label.name(), system.basis().format(label.sigma),
                       label.sigma.value, fmt::join(records, ", "));
  }
  return out;
}

}  // namespace oscillode
