// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oscillode/errors.hpp"
#include "oscillode/harness.hpp"
#include "oscillode/problems.hpp"

namespace {

using namespace oscillode;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

double sup_norm(const CVector& v) { return v.lpNorm<Eigen::Infinity>(); }

// ---------------------------------------------------------------------------
// rho oracle: integer coordinates over {1, √2}, every ordered tuple enumerated

using Coordinates = std::vector<std::vector<long>>;

long brute_force_rho(const Coordinates& kappas, const std::vector<long>& target, std::vector<int> source) {
  const int M = static_cast<int>(kappas.size()) - 1;
  const std::size_t n = source.size();
  std::sort(source.begin(), source.end());
  long count = 0;
  std::vector<int> tuple(n, 0);
  while (true) {
    std::vector<int> sorted = tuple;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == source) {
      std::vector<long> total(target.size(), 0);
      for (int m : tuple) {
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += kappas[static_cast<std::size_t>(m)][k];
      }
      if (total == target) ++count;
    }
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++tuple[i] <= M) break;
      tuple[i] = 0;
    }
    if (i == n) break;
  }
  return count;
}

std::vector<long> integer_coordinates(const Frequency& f) {
  std::vector<long> out;
  for (const Rational& q : f.coordinates) {
    if (q.denominator() != 1) throw std::logic_error("oracle expects integer coordinates");
    out.push_back(q.numerator());
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome table_reproduction() {
  Outcome out;
  const auto start = Clock::now();
  const RegisteredProblem worked = make_worked_example();
  const FrequencySystem& system = worked.problem->frequencies;
  const std::vector<IndexSet> chain = build_index_chain(system, 4);
  const IndexSet& u4 = chain[4];

  struct Row {
    const char* sigma;
    double value;
  };
  const double r2 = std::sqrt(2.0);
  const Row table[] = {{"0", 0.0},           {"1", 1.0},           {"√2", r2},          {"-1 - √2", -1 - r2},
                       {"2", 2.0},           {"1 + √2", 1 + r2},   {"-√2", -r2},        {"2√2", 2 * r2},
                       {"-1", -1.0},         {"-2 - 2√2", -2 - 2 * r2}, {"3", 3.0},     {"2 + √2", 2 + r2},
                       {"1 - √2", 1 - r2},   {"1 + 2√2", 1 + 2 * r2}, {"-1 - 2√2", -1 - 2 * r2},
                       {"3√2", 3 * r2},      {"-1 + √2", -1 + r2}, {"-2 - √2", -2 - r2}, {"-3 - 3√2", -3 - 3 * r2}};
  out.require(u4.size() == 19, fmt::format("{} labels", u4.size()));
  for (std::size_t i = 0; i < std::min<std::size_t>(u4.size(), 19); ++i) {
    const std::string sigma = system.basis().format(u4.labels[i].sigma);
    out.require(sigma == table[i].sigma, fmt::format("label {} sigma {} != {}", i, sigma, table[i].sigma));
    out.require(std::abs(u4.labels[i].sigma.value - table[i].value) <= 1e-12, fmt::format("label {} float", i));
  }

  // every nonzero rho over sorted length-3 sources against the oracle
  const int M = system.count();
  Coordinates kappas;
  for (int m = 0; m <= M; ++m) kappas.push_back(integer_coordinates(system.kappa(m)));
  std::vector<std::vector<int>> sources;
  for (int a = 0; a <= M; ++a)
    for (int b = a; b <= M; ++b)
      for (int c = b; c <= M; ++c) sources.push_back({a, b, c});
  long nonzero = 0;
  for (const FrequencyLabel& label : u4.labels) {
    const std::vector<long> target = integer_coordinates(label.sigma);
    for (const auto& source : sources) {
      const long expected = brute_force_rho(kappas, target, source);
      const long actual = static_cast<long>(system.rho(label, source));
      out.require(actual == expected, fmt::format("rho {} {}", label.name(), fmt::join(source, ",")));
      if (actual != 0) ++nonzero;
    }
  }
  // rho^0 over (1, 2, 3) is listed per leading index as 2 + 2 + 2
  const int zero_tuple[] = {1, 2, 3};
  out.require(system.rho(u4.labels[0], zero_tuple) == 6, "rho^0_{1,2,3}");

  const std::string text = format_index_table(system, u4, 3);
  const long rows = std::count(text.begin(), text.end(), '\n') - 2;
  out.require(rows == 19, fmt::format("table has {} rows", rows));
  const double elapsed = seconds_since(start);
  out.require(elapsed < 1.0, fmt::format("{:.3f} s", elapsed));
  out.detail = fmt::format("19 labels, {} nonzero rho entries checked, {:.3f} s{}", nonzero, elapsed,
                           out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome index_set_exclusions() {
  Outcome out;
  const RegisteredProblem memristor = make_memristor();
  const IndexSet u3 = build_index_chain(memristor.problem->frequencies, 3)[3];
  std::vector<std::string> names;
  for (const FrequencyLabel& label : u3.labels) names.push_back(label.name());
  out.require(u3.size() == 13, fmt::format("{} labels", u3.size()));
  for (const char* absent : {"(1, 2)", "(3, 4)"}) {
    out.require(std::find(names.begin(), names.end(), absent) == names.end(), std::string(absent) + " present");
  }
  out.detail = fmt::format("U_3 = {{{}}}{}", fmt::join(names, " "), out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome initial_condition_identity() {
  Outcome out;
  double worst = 0.0;
  for (const RegisteredProblem& registered : {make_linear_example(), make_memristor()}) {
    Expansion e = build_expansion(registered.problem, 3);
    solve_nonoscillatory_chain(e, 0.1);
    const CoefficientSample sample = sample_coefficients(e, 0.0);
    for (int r = 1; r <= 3; ++r) {
      CVector total = CVector::Zero(registered.problem->dimension());
      for (const CVector& value : sample.values[static_cast<std::size_t>(r)]) total += value;
      worst = std::max(worst, sup_norm(total));
    }
  }
  out.require(worst <= 1e-12, fmt::format("zero-sum residual {:.3e}", worst));

  const MemristorParameters params;
  const double A = 0.1;
  const Expansion e = build_expansion(make_memristor(params, A).problem, 3);
  const std::vector<CVector> initial = initial_node_values(e);
  const CVector& p10 = initial[*e.node_index(1, 0)];
  const CVector& p20 = initial[*e.node_index(2, 0)];
  const double expected = 0.5 * A * params.b * (2.0 + std::sqrt(2.0));
  const double p10_error = std::abs(p10[4] - expected) + sup_norm(p10.head(4));
  out.require(p10_error <= 1e-12, fmt::format("p_(1,0)(0)_5 = {} vs {}", p10[4].real(), expected));
  out.require(sup_norm(p20) <= 1e-12, fmt::format("|p_(2,0)(0)| = {:.3e}", sup_norm(p20)));
  out.detail = fmt::format("max |sum_m p_(r,m)(0)| = {:.2e}, p_(1,0)(0)_5 = {:.15f} = {:.10f} Ab{}", worst,
                           p10[4].real(), p10[4].real() / (A * params.b), out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome linear_oracle_equivalence() {
  Outcome out;
  const auto start = Clock::now();
  const RegisteredProblem linear = make_linear_example();
  Expansion e = build_expansion(linear.problem, 4);
  solve_nonoscillatory_chain(e, linear.t_end);
  const LinearCoefficients closed(*linear.linear, 4);
  const int M = linear.problem->forcing_count();
  double worst = 0.0;
  for (double t : uniform_grid(linear.t_end, 501)) {
    const CoefficientSample sample = sample_coefficients(e, t);
    worst = std::max(worst, sup_norm(sample.values[0][0] - closed.value(0, 0, t)));
    for (int r = 1; r <= 4; ++r) {
      const auto& level = sample.values[static_cast<std::size_t>(r)];
      for (std::size_t m = 0; m < level.size(); ++m) {
        const bool carried = static_cast<int>(m) <= M;
        worst = std::max(worst, sup_norm(carried ? CVector(level[m] - closed.value(r, static_cast<int>(m), t)) : level[m]));
      }
    }
  }
  const double elapsed = seconds_since(start);
  out.require(worst <= 1e-10, fmt::format("deviation {:.3e}", worst));
  out.require(elapsed < 10.0, fmt::format("{:.2f} s", elapsed));
  out.detail = fmt::format("sup deviation {:.2e} over {} nodes, {:.2f} s{}", worst, e.nodes().size(), elapsed,
                           out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome omega_scaling() {
  Outcome out;
  const auto start = Clock::now();
  ErrorStudyOptions options;
  options.omegas = {250.0, 500.0, 1000.0, 2000.0, 4000.0};
  options.orders = {0, 1, 2, 3};
  const ErrorReport report = run_error_study(make_linear_example(), options);
  out.require(report.reference_provenance.front() == "exact", "reference is not the exact solution");
  std::vector<std::string> slopes;
  for (const SlopeFit& fit : fit_slopes(report, 0.25)) {
    slopes.push_back(fmt::format("s={} {:.3f}", fit.s, fit.slope));
    out.require(fit.within, fmt::format("s={} slope {:.3f} expected {:.0f}", fit.s, fit.slope, fit.expected));
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 60.0, fmt::format("{:.1f} s", elapsed));
  out.detail = fmt::format("slopes {}, {:.1f} s{}", fmt::join(slopes, ", "), elapsed,
                           out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome memristor_error_decay() {
  Outcome out;
  const auto start = Clock::now();
  const RegisteredProblem memristor = make_memristor();
  ErrorStudyOptions options;
  options.omegas = {100.0, 1000.0};
  options.orders = {0, 1, 2, 3};
  options.t_end = 3.0;
  options.reference.abs_tol = 1e-10;
  options.reference.rel_tol = 1e-10;
  options.reference.cache_dir = OSCILLODE_CACHE_DIR;
  const ErrorReport report = run_error_study(memristor, options);

  std::map<std::pair<double, int>, const ErrorCurve*> curves;
  for (const ErrorCurve& curve : report.curves) curves[{curve.omega, curve.s}] = &curve;
  for (double omega : options.omegas) {
    for (int s = 1; s <= 3; ++s) {
      const ErrorCurve& lower = *curves.at({omega, s - 1});
      const ErrorCurve& upper = *curves.at({omega, s});
      for (std::size_t k = 0; k < upper.component_sup.size(); ++k) {
        out.require(upper.component_sup[k] < lower.component_sup[k],
                    fmt::format("omega {} component {} s={} {:.3e} !< {:.3e}", omega, k + 1, s,
                                upper.component_sup[k], lower.component_sup[k]));
      }
    }
  }
  const double low = curves.at({100.0, 3})->sup;
  const double high = curves.at({1000.0, 3})->sup;
  const double ratio = high / low;
  out.require(ratio >= 1e-4 / 5.0 && ratio <= 5e-4, fmt::format("ratio {:.3e}", ratio));

  std::vector<std::string> sups;
  for (double omega : options.omegas) {
    std::vector<std::string> row;
    for (int s = 0; s <= 3; ++s) row.push_back(fmt::format("{:.2e}", curves.at({omega, s})->sup));
    sups.push_back(fmt::format("omega={}: {}", omega, fmt::join(row, " ")));
  }
  out.detail = fmt::format("{}; eps_3 ratio {:.3e}; {:.1f} s{}", fmt::join(sups, "; "), ratio, seconds_since(start),
                           out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome cost_flatness() {
  Outcome out;
  CostOptions options;
  // a fine grid keeps each timed evaluation well above timer noise
  options.grid = 4096;
  options.repeats = 5;
  const CostReport report = compare_cost(make_linear_example(), {500.0, 5000.0}, 3, options);
  const CostEntry& low = report.entries[0];
  const CostEntry& high = report.entries[1];
  const double eval_ratio = high.expansion_seconds / low.expansion_seconds;
  const double rk_ratio = high.reference_seconds / low.reference_seconds;
  out.require(report.expansion_builds == 1, "expansion rebuilt per omega");
  out.require(eval_ratio <= 1.2, fmt::format("evaluation ratio {:.2f}", eval_ratio));
  out.require(rk_ratio >= 3.0, fmt::format("rk ratio {:.2f}", rk_ratio));
  out.detail = fmt::format("expansion {:.4f} s -> {:.4f} s (x{:.2f}), rk {:.3f} s -> {:.3f} s (x{:.2f}){}",
                           low.expansion_seconds, high.expansion_seconds, eval_ratio, low.reference_seconds,
                           high.reference_seconds, rk_ratio, out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

CVector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(u(rng), u(rng));
  return v;
}

Outcome property_suites() {
  Outcome out;
  std::mt19937_64 rng(20240601);

  // rho against the permutation oracle on random frequency sets
  const FrequencyBasis basis = sqrt2_basis();
  int rho_cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int M = std::uniform_int_distribution<int>(1, 4)(rng);
    Coordinates coords{{0, 0}};
    std::vector<Frequency> kappas;
    while (static_cast<int>(kappas.size()) < M) {
      const long a = std::uniform_int_distribution<long>(-2, 2)(rng);
      const long b = std::uniform_int_distribution<long>(-1, 1)(rng);
      if (a == 0 && b == 0) continue;
      coords.push_back({a, b});
      kappas.push_back(basis.make({Rational(a), Rational(b)}));
    }
    const FrequencySystem system(basis, kappas);
    std::vector<int> source(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 4)(rng)));
    for (int& m : source) m = std::uniform_int_distribution<int>(0, M)(rng);
    std::vector<int> target(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 4)(rng)));
    for (int& m : target) m = std::uniform_int_distribution<int>(0, M)(rng);
    if (trial % 2 == 0) {
      target = source;
      std::shuffle(target.begin(), target.end(), rng);
    }
    std::vector<long> target_coords{0, 0};
    for (int m : target) {
      target_coords[0] += coords[static_cast<std::size_t>(m)][0];
      target_coords[1] += coords[static_cast<std::size_t>(m)][1];
    }
    const long expected = brute_force_rho(coords, target_coords, source);
    const long actual = static_cast<long>(system.rho(system.canonicalize(target), source));
    if (actual != expected) {
      out.require(false, fmt::format("rho trial {}: {} != {}", trial, actual, expected));
      break;
    }
    ++rho_cases;
  }

  // symmetry and multilinearity of the memristor differentials
  const MemristorField field;
  double symmetry = 0.0;
  double linearity = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const CVector y = random_vector(rng, 5, 0.8);
    std::vector<CVector> dirs;
    for (int k = 0; k < 3; ++k) dirs.push_back(random_vector(rng, 5));
    const CVector base = field.differential(y, dirs);
    std::vector<CVector> swapped{dirs[2], dirs[0], dirs[1]};
    symmetry = std::max(symmetry, sup_norm(field.differential(y, swapped) - base) / (1.0 + sup_norm(base)));
    const Complex alpha(0.3, -1.1);
    const CVector extra = random_vector(rng, 5);
    std::vector<CVector> mixed = dirs;
    mixed[0] = alpha * dirs[0] + extra;
    std::vector<CVector> other = dirs;
    other[0] = extra;
    const CVector combined = alpha * base + field.differential(y, other);
    linearity = std::max(linearity, sup_norm(field.differential(y, mixed) - combined) / (1.0 + sup_norm(combined)));
  }
  out.require(symmetry <= 1e-12, fmt::format("symmetry {:.2e}", symmetry));
  out.require(linearity <= 1e-12, fmt::format("multilinearity {:.2e}", linearity));

  // coefficient derivatives against central differences
  Expansion e = build_expansion(make_memristor().problem, 3);
  solve_nonoscillatory_chain(e, 1.0);
  double fd_worst = 0.0;
  const double h = 1e-4;
  for (double t : {0.25, 0.5, 0.75}) {
    for (const CoefficientNode& node : e.nodes()) {
      const CVector analytic = coefficient_derivative(e, node.level, node.label, t);
      const CVector fd =
          (coefficient_value(e, node.level, node.label, t + h) - coefficient_value(e, node.level, node.label, t - h)) /
          (2.0 * h);
      fd_worst = std::max(fd_worst, sup_norm(fd - analytic) / std::max(sup_norm(analytic), 1e-6));
    }
  }
  out.require(fd_worst <= 1e-6, fmt::format("coefficient fd {:.2e}", fd_worst));

  // memristor differentials against Richardson finite differences to order 4
  std::vector<ValidationSample> samples;
  for (int s = 0; s < 8; ++s) {
    ValidationSample sample{random_vector(rng, 5, 0.8), {}};
    for (int k = 0; k < 4; ++k) sample.directions.push_back(random_vector(rng, 5));
    samples.push_back(sample);
  }
  double validation = 0.0;
  try {
    validation = validate_field(field, samples).max_deviation;
  } catch (const ValidationFailed& error) {
    out.require(false, error.what());
  }
  out.detail = fmt::format("{} rho cases, symmetry {:.1e}, multilinearity {:.1e}, coefficient fd {:.1e}, "
                           "memristor fd to order 4 {:.1e}{}",
                           rho_cases, symmetry, linearity, fd_worst, validation,
                           out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"table reproduction", table_reproduction},
      {"index-set exclusions", index_set_exclusions},
      {"initial-condition identity", initial_condition_identity},
      {"linear-oracle equivalence", linear_oracle_equivalence},
      {"omega scaling", omega_scaling},
      {"memristor error decay", memristor_error_decay},
      {"cost flatness", cost_flatness},
      {"property suites", property_suites},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = fmt::format("exception: {}", e.what());
    }
    if (!outcome.pass) ++failures;
    fmt::print("[{}] criterion {} {}: {}\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
