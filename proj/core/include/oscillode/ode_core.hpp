#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "oscillode/deriv_engine.hpp"

namespace oscillode {

/// Initial value problem y' = rhs(t, y), y(t_begin) = y0 on [t_begin, t_end].
struct IvpSpec {
  std::function<CVector(double, const CVector&)> rhs;
  /// Optional y''(t) given (t, y, y'); when set, dense output is quintic
  /// Hermite instead of cubic.
  std::function<CVector(double, const CVector&, const CVector&)> second_derivative;
  CVector y0;
  double t_begin = 0.0;
  double t_end = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  long max_steps = 50'000'000;
  double max_step = std::numeric_limits<double>::infinity();
  /// Steps are shortened to land exactly on these times (sorted ascending).
  std::vector<double> output_times;
  /// When false only t_begin, t_end and output_times are stored.
  bool dense = true;
};

enum class Interpolation { kCubicHermite, kQuinticHermite };

struct SolverStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
};

/// Accepted nodes of an integration with a piecewise Hermite interpolant.
class DenseSolution {
 public:
  DenseSolution() = default;

  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::span<const double> times() const { return times_; }
  Interpolation interpolation() const { return second_.empty() ? Interpolation::kCubicHermite
                                                               : Interpolation::kQuinticHermite; }
  const SolverStats& stats() const { return stats_; }

  CVector state(std::size_t i) const;
  CVector derivative(std::size_t i) const;

  /// Interpolated state; exact node value when t is a node. Throws OutOfDomain
  /// outside [t_begin, t_end].
  CVector sample(double t) const;

  /// Approximate heap footprint of the stored nodes.
  std::size_t memory_bytes() const;

 private:
  friend DenseSolution integrate(const IvpSpec& spec);

  void append(double t, const CVector& y, const CVector& f, const CVector* second);

  Eigen::Index dimension_ = 0;
  std::vector<double> times_;
  std::vector<Complex> states_;
  std::vector<Complex> derivs_;
  std::vector<Complex> second_;
  SolverStats stats_;
};

/// Embedded Runge-Kutta-Fehlberg 4(5), advancing with the fifth-order
/// solution. Per-step error control max_i |err_i| / (abs + rel max(|y_i|,
/// |y_new_i|)) <= 1; step factor 0.9 err^{-1/5} clamped to [0.2, 5].
/// Throws StepUnderflow or MaxStepsExceeded.
DenseSolution integrate(const IvpSpec& spec);

}  // namespace oscillode
