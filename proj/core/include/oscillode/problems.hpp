#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oscillode/expansion.hpp"
#include "oscillode/linear_closed_form.hpp"

namespace oscillode {

struct MemristorParameters {
  double a = 8.0;
  double b = 10.0;
  double c = 0.0;
  double d = 2.0;
  double e = 0.1;
};

/// Two-memristor circuit with W(u) = 1 + 3u^2:
///   y1' = y3
///   y2' = (y4 - y3) g(y2)
///   y3' = a y3 (d - W(y1)) - a (y3 - y4) W(y2) g(y2)
///   y4' = (y3 - y4) W(y2) g(y2) + y5
///   y5' = -b y4 - c y5
/// with g(u) = 1 / (1 + e W(u)). Exact differentials of every order.
class MemristorField final : public VectorField {
 public:
  explicit MemristorField(MemristorParameters parameters = {});

  Eigen::Index dimension() const override { return 5; }
  int max_order() const override { return kUnboundedOrder; }
  CVector evaluate(const CVector& y) const override;
  const MemristorParameters& parameters() const { return parameters_; }

  /// k-th derivative of g at u.
  Complex g_derivative(int k, Complex u) const;
  /// k-th derivative of W g at u.
  Complex h_derivative(int k, Complex u) const;

 protected:
  CVector compute_differential(const CVector& y, std::span<const CVector> directions) const override;

 private:
  MemristorParameters parameters_;
};

struct RegisteredProblem {
  std::string name;
  std::shared_ptr<const Problem> problem;
  std::optional<LinearProblem> linear;  // closed forms and exact reference when set
  double t_end = 5.0;
  std::vector<double> omegas;
  std::vector<int> orders;
  std::string notes;
};

class ProblemRegistry {
 public:
  /// linear_example, memristor and worked_example.
  static ProblemRegistry builtin();

  /// Throws std::invalid_argument on a duplicate name.
  void add(RegisteredProblem problem);
  /// Throws std::invalid_argument listing the known names.
  const RegisteredProblem& find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, RegisteredProblem> problems_;
};

RegisteredProblem make_linear_example();
RegisteredProblem make_memristor(MemristorParameters parameters = {}, double amplitude = 0.1);
RegisteredProblem make_worked_example();

/// Frequency basis {1, √2}.
FrequencyBasis sqrt2_basis();

/// Overrides read from a `key = value` text file. Lines starting with '#' are
/// comments. Keys: problem, dimension, basis (e.g. "1, sqrt(2)"), kappa
/// (coordinate vectors separated by ';', coordinates by spaces, rationals
/// allowed), y0 (comma separated reals), t_end.
struct ProblemConfig {
  std::optional<std::string> problem;
  std::optional<Eigen::Index> dimension;
  std::optional<std::vector<BasisElement>> basis;
  std::optional<std::vector<std::vector<Rational>>> kappa;
  std::optional<std::vector<double>> y0;
  std::optional<double> t_end;
};

/// Throws std::invalid_argument naming the offending line.
ProblemConfig parse_problem_config(const std::string& text);
ProblemConfig load_problem_config(const std::string& path);

/// Applies overrides to a registered problem; the vector field and forcing
/// amplitudes stay those registered in code.
RegisteredProblem apply_config(const RegisteredProblem& base, const ProblemConfig& config,
                               std::optional<double> delta_min = std::nullopt);

}  // namespace oscillode
