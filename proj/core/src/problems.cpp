#include "oscillode/problems.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace oscillode {
namespace {

using LinearForm = std::array<double, 5>;

Complex apply(const LinearForm& form, const CVector& v) {
  Complex total{0.0, 0.0};
  for (std::size_t i = 0; i < form.size(); ++i) {
    if (form[i] != 0.0) total += form[i] * v[static_cast<Eigen::Index>(i)];
  }
  return total;
}

// n-th differential of (form . y) phi(y_k) along the directions, where
// phi(j, u) is the j-th derivative of phi.
template <typename Phi>
Complex product_differential(const LinearForm& form, Eigen::Index k, const Phi& phi, const CVector& y,
                             std::span<const CVector> directions) {
  const int n = static_cast<int>(directions.size());
  Complex all{1.0, 0.0};
  for (const CVector& v : directions) all *= v[k];
  Complex total = apply(form, y) * phi(n, y[k]) * all;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    Complex others{1.0, 0.0};
    for (std::size_t j = 0; j < directions.size(); ++j) {
      if (j != i) others *= directions[j][k];
    }
    total += apply(form, directions[i]) * phi(n - 1, y[k]) * others;
  }
  return total;
}

Complex square_derivative(int k, Complex u) {
  switch (k) {
    case 0: return u * u;
    case 1: return 2.0 * u;
    case 2: return {2.0, 0.0};
    default: return {0.0, 0.0};
  }
}

constexpr LinearForm kY3 = {0, 0, 1, 0, 0};
constexpr LinearForm kY4MinusY3 = {0, 0, -1, 1, 0};
constexpr LinearForm kY3MinusY4 = {0, 0, 1, -1, 0};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char separator) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string part;
  while (std::getline(stream, part, separator)) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double parse_double(const std::string& text, int line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument(fmt::format("config line {}: '{}' is not a number", line, text));
  }
}

BasisElement parse_basis_element(const std::string& text, int line) {
  if (text == "1") return {"1", 1.0};
  if (text.rfind("sqrt(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(5, text.size() - 6);
    const double radicand = parse_double(inner, line);
    if (!(radicand > 0.0)) throw std::invalid_argument(fmt::format("config line {}: sqrt of non-positive", line));
    return {"√" + inner, std::sqrt(radicand)};
  }
  throw std::invalid_argument(fmt::format("config line {}: basis element '{}' is neither 1 nor sqrt(N)", line, text));
}

}  // namespace

// ---------------------------------------------------------------------------

MemristorField::MemristorField(MemristorParameters parameters) : parameters_(parameters) {
  if (!(parameters_.e > 0.0)) throw std::invalid_argument("memristor parameter e must be positive");
}

Complex MemristorField::g_derivative(int k, Complex u) const {
  const double alpha = 1.0 + parameters_.e;
  const double beta = 3.0 * parameters_.e;
  // Taylor coefficients of 1 / (q0 + q1 x + q2 x^2)
  const Complex q0 = alpha + beta * u * u;
  const Complex q1 = 2.0 * beta * u;
  const double q2 = beta;
  Complex previous{0.0, 0.0};
  Complex current = 1.0 / q0;
  double factorial = 1.0;
  for (int j = 1; j <= k; ++j) {
    const Complex next = -(q1 * current + q2 * previous) / q0;
    previous = current;
    current = next;
    factorial *= j;
  }
  return factorial * current;
}

Complex MemristorField::h_derivative(int k, Complex u) const {
  if (k == 0) return (1.0 + 3.0 * u * u) * g_derivative(0, u);
  return -g_derivative(k, u) / parameters_.e;
}

CVector MemristorField::evaluate(const CVector& y) const {
  const auto& p = parameters_;
  const Complex g = g_derivative(0, y[1]);
  const Complex h = h_derivative(0, y[1]);
  CVector f(5);
  f[0] = y[2];
  f[1] = (y[3] - y[2]) * g;
  f[2] = p.a * y[2] * (p.d - (1.0 + 3.0 * y[0] * y[0])) - p.a * (y[2] - y[3]) * h;
  f[3] = (y[2] - y[3]) * h + y[4];
  f[4] = -p.b * y[3] - p.c * y[4];
  return f;
}

CVector MemristorField::compute_differential(const CVector& y, std::span<const CVector> directions) const {
  const auto& p = parameters_;
  const int n = static_cast<int>(directions.size());
  auto g = [this](int k, Complex u) { return g_derivative(k, u); };
  auto h = [this](int k, Complex u) { return h_derivative(k, u); };

  CVector out = CVector::Zero(5);
  if (n == 1) {
    const CVector& v = directions[0];
    out[0] = v[2];
    out[2] = p.a * (p.d - 1.0) * v[2];
    out[3] = v[4];
    out[4] = -p.b * v[3] - p.c * v[4];
  }
  out[1] = product_differential(kY4MinusY3, 1, g, y, directions);
  out[2] += -3.0 * p.a * product_differential(kY3, 0, square_derivative, y, directions) -
            p.a * product_differential(kY3MinusY4, 1, h, y, directions);
  out[3] += product_differential(kY3MinusY4, 1, h, y, directions);
  return out;
}

// ---------------------------------------------------------------------------

FrequencyBasis sqrt2_basis() { return FrequencyBasis::exact({{"1", 1.0}, {"√2", std::sqrt(2.0)}}); }

RegisteredProblem make_linear_example() {
  CMatrix A(2, 2);
  A << 0.0, 1.0, -4.2, -0.6;
  const FrequencyBasis basis = sqrt2_basis();
  std::vector<Frequency> kappas = {basis.make({0, 1}), basis.make({-1, -1})};

  LinearProblem linear;
  linear.matrix = A;
  linear.kappas = {kappas[0].value, kappas[1].value};
  const CVector zero = CVector::Zero(2);
  const CVector e2 = CVector::Unit(2, 1);
  linear.amplitudes = {{zero, e2}, {zero, zero, e2}};
  linear.y0 = CVector::Constant(2, Complex(0.5, 0.0));

  std::vector<ForcingTerm> forcings = {ForcingTerm::polynomial(1, linear.amplitudes[0]),
                                       ForcingTerm::polynomial(2, linear.amplitudes[1])};
  auto problem = std::make_shared<Problem>("linear_example", std::make_shared<LinearField>(A), std::move(forcings),
                                           linear.y0, FrequencySystem(basis, kappas));

  RegisteredProblem entry;
  entry.name = "linear_example";
  entry.problem = std::move(problem);
  entry.linear = std::move(linear);
  entry.t_end = 5.0;
  entry.omegas = {500.0, 5000.0};
  entry.orders = {0, 1, 2, 3, 4};
  entry.notes = "x'' + 0.6x' + 4.2x = t e^{i√2ωt} + t² e^{-i(1+√2)ωt}, x(0) = x'(0) = 0.5";
  return entry;
}

RegisteredProblem make_memristor(MemristorParameters parameters, double amplitude) {
  const FrequencyBasis basis = sqrt2_basis();
  std::vector<Frequency> kappas = {basis.make({1, 0}), basis.make({-1, 0}), basis.make({0, 1}), basis.make({0, -1})};
  // forcing (A b / 2i) e^{iκ_1ωt} - (A b / 2i) e^{iκ_2ωt} + ... in the fifth component
  const Complex strength = amplitude * parameters.b / Complex(0.0, 2.0);
  std::vector<ForcingTerm> forcings;
  for (int m = 1; m <= 4; ++m) {
    CVector a = CVector::Zero(5);
    a[4] = (m % 2 == 1) ? strength : -strength;
    forcings.push_back(ForcingTerm::constant(m, a));
  }
  CVector y0(5);
  y0 << -0.8, -0.4, 0.0, 1e-4, 0.0;
  auto problem = std::make_shared<Problem>("memristor", std::make_shared<MemristorField>(parameters),
                                           std::move(forcings), y0, FrequencySystem(basis, kappas));

  RegisteredProblem entry;
  entry.name = "memristor";
  entry.problem = std::move(problem);
  entry.t_end = 3.0;
  entry.omegas = {100.0, 1000.0};
  entry.orders = {0, 1, 2, 3};
  entry.notes = fmt::format("two-memristor circuit, a={} b={} c={} d={} e={} A={}, κ = 1, -1, √2, -√2", parameters.a,
                            parameters.b, parameters.c, parameters.d, parameters.e, amplitude);
  return entry;
}

RegisteredProblem make_worked_example() {
  const FrequencyBasis basis = sqrt2_basis();
  std::vector<Frequency> kappas = {basis.make({1, 0}), basis.make({0, 1}), basis.make({-1, -1})};
  // damped Duffing oscillator y1' = y2, y2' = -y1 - 0.3 y2 - y1^3
  using M = PolynomialField::Monomial;
  auto field = std::make_shared<PolynomialField>(
      2, std::vector<M>{{0, 1.0, {0, 1}}, {1, -1.0, {1, 0}}, {1, -0.3, {0, 1}}, {1, -1.0, {3, 0}}});
  std::vector<ForcingTerm> forcings;
  const double strengths[] = {1.0, 0.5, 0.25};
  for (int m = 1; m <= 3; ++m) {
    CVector a = CVector::Zero(2);
    a[1] = strengths[m - 1];
    forcings.push_back(ForcingTerm::constant(m, a));
  }
  CVector y0(2);
  y0 << 1.0, 0.0;
  auto problem =
      std::make_shared<Problem>("worked_example", field, std::move(forcings), y0, FrequencySystem(basis, kappas));

  RegisteredProblem entry;
  entry.name = "worked_example";
  entry.problem = std::move(problem);
  entry.t_end = 5.0;
  entry.omegas = {100.0, 1000.0};
  entry.orders = {0, 1, 2, 3};
  entry.notes = "κ = 1, √2, -1-√2 driving a damped Duffing oscillator";
  return entry;
}

// ---------------------------------------------------------------------------

ProblemRegistry ProblemRegistry::builtin() {
  ProblemRegistry registry;
  registry.add(make_linear_example());
  registry.add(make_memristor());
  registry.add(make_worked_example());
  return registry;
}

void ProblemRegistry::add(RegisteredProblem problem) {
  const std::string name = problem.name;
  if (!problems_.emplace(name, std::move(problem)).second) {
    throw std::invalid_argument(fmt::format("problem '{}' already registered", name));
  }
}

const RegisteredProblem& ProblemRegistry::find(const std::string& name) const {
  const auto it = problems_.find(name);
  if (it == problems_.end()) {
    throw std::invalid_argument(fmt::format("unknown problem '{}' (known: {})", name, fmt::join(names(), ", ")));
  }
  return it->second;
}

std::vector<std::string> ProblemRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : problems_) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------

ProblemConfig parse_problem_config(const std::string& text) {
  ProblemConfig config;
  std::stringstream stream(text);
  std::string raw;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const std::string content = trim(raw);
    if (content.empty() || content.front() == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(fmt::format("config line {}: expected key = value", line));
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (value.empty()) throw std::invalid_argument(fmt::format("config line {}: empty value for '{}'", line, key));

    if (key == "problem") {
      config.problem = value;
    } else if (key == "dimension") {
      const double d = parse_double(value, line);
      if (d < 1 || d != std::floor(d)) throw std::invalid_argument(fmt::format("config line {}: bad dimension", line));
      config.dimension = static_cast<Eigen::Index>(d);
    } else if (key == "basis") {
      std::vector<BasisElement> basis;
      for (const std::string& part : split(value, ',')) basis.push_back(parse_basis_element(part, line));
      config.basis = std::move(basis);
    } else if (key == "kappa") {
      std::vector<std::vector<Rational>> kappa;
      for (const std::string& vector : split(value, ';')) {
        std::vector<Rational> coordinates;
        std::stringstream coords(vector);
        std::string token;
        while (coords >> token) {
          try {
            coordinates.push_back(Rational::parse(token));
          } catch (const std::exception&) {
            throw std::invalid_argument(fmt::format("config line {}: '{}' is not a rational", line, token));
          }
        }
        kappa.push_back(std::move(coordinates));
      }
      config.kappa = std::move(kappa);
    } else if (key == "y0") {
      std::vector<double> y0;
      for (const std::string& part : split(value, ',')) y0.push_back(parse_double(part, line));
      config.y0 = std::move(y0);
    } else if (key == "t_end") {
      config.t_end = parse_double(value, line);
      if (!(*config.t_end > 0.0)) throw std::invalid_argument(fmt::format("config line {}: t_end must be > 0", line));
    } else {
      throw std::invalid_argument(fmt::format("config line {}: unknown key '{}'", line, key));
    }
  }
  return config;
}

ProblemConfig load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot read config file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_config(buffer.str());
}

RegisteredProblem apply_config(const RegisteredProblem& base, const ProblemConfig& config,
                               std::optional<double> delta_min) {
  const Problem& old = *base.problem;
  if (config.dimension && *config.dimension != old.dimension()) {
    throw std::invalid_argument(fmt::format("config dimension {} does not match the {} field of dimension {}",
                                            *config.dimension, base.name, old.dimension()));
  }
  if (config.basis && !config.kappa) throw std::invalid_argument("config sets a basis without kappa");

  FrequencyBasis basis = config.basis ? FrequencyBasis::exact(*config.basis) : old.frequencies.basis();
  std::vector<Frequency> kappas;
  if (config.kappa) {
    for (const auto& coordinates : *config.kappa) kappas.push_back(basis.make(coordinates));
  } else {
    for (int m = 1; m <= old.forcing_count(); ++m) kappas.push_back(old.frequencies.kappa(m));
  }
  if (static_cast<int>(kappas.size()) != old.forcing_count()) {
    throw std::invalid_argument(fmt::format("config gives {} frequencies, {} has {} forcings", kappas.size(),
                                            base.name, old.forcing_count()));
  }
  std::optional<double> threshold = delta_min;
  if (!threshold && !config.kappa) threshold = old.frequencies.delta_min();

  CVector y0 = old.y0;
  if (config.y0) {
    if (static_cast<Eigen::Index>(config.y0->size()) != old.dimension()) {
      throw std::invalid_argument("config y0 has the wrong dimension");
    }
    for (std::size_t i = 0; i < config.y0->size(); ++i) y0[static_cast<Eigen::Index>(i)] = (*config.y0)[i];
  }

  RegisteredProblem entry = base;
  std::vector<double> kappa_values;
  for (const Frequency& k : kappas) kappa_values.push_back(k.value);
  entry.problem = std::make_shared<Problem>(old.name, old.field, old.forcings, y0,
                                            FrequencySystem(basis, std::move(kappas), threshold));
  if (entry.linear) {
    entry.linear->kappas = kappa_values;
    entry.linear->y0 = y0;
  }
  if (config.t_end) entry.t_end = *config.t_end;
  return entry;
}

}  // namespace oscillode
