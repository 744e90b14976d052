#pragma once

#include <vector>

#include "oscillode/deriv_engine.hpp"

namespace oscillode {

/// y' = A y + sum_m a_m(t) e^{i kappa_m omega t} with polynomial amplitudes.
struct LinearProblem {
  CMatrix matrix;
  std::vector<double> kappas;                   // kappa_1..kappa_M
  std::vector<std::vector<CVector>> amplitudes;  // amplitudes[m-1][j] multiplies t^j
  CVector y0;

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
  /// j-th derivative of a_m at t, m in 1..M.
  CVector amplitude_derivative(int m, int j, double t) const;
};

/// e^{tA} by scaling and squaring with the degree-13 Pade approximant.
CMatrix matrix_exponential(const CMatrix& matrix, double t = 1.0);

/// Closed-form expansion coefficients of a linear problem. Label 0 is the
/// non-oscillatory coefficient, label m in 1..M carries kappa_m; every other
/// frequency has a vanishing coefficient.
class LinearCoefficients {
 public:
  LinearCoefficients(LinearProblem problem, int order);

  int order() const { return order_; }
  /// p_{r,m}(t) for 0 <= r <= order, 0 <= m <= M (r = 0 requires m = 0).
  CVector value(int r, int m, double t) const;

 private:
  /// (i kappa_m)^{-r} sum_l (-1)^l C(r-1, l) A^{r-1-l} a_m^{(l)}(t).
  CVector oscillatory(int r, int m, double t) const;

  LinearProblem problem_;
  int order_;
  std::vector<CMatrix> powers_;  // A^0..A^{order}
  std::vector<CVector> level_start_;  // sum_m p_{r,m}(0)
};

/// Exact solution y(t) = e^{tA}(y0 - sum_m q_m(0)) + sum_m q_m(t) e^{i kappa_m omega t}
/// with polynomial q_m solving q_m' + (i kappa_m omega I - A) q_m = a_m.
class ExactLinearSolution {
 public:
  /// Throws SingularResolvent when some i kappa_m omega I - A is numerically
  /// singular, and ValidationFailed when the ODE residual at 20 pseudo-random
  /// points of [0, check_span] exceeds 1e-10 (1 + |y|).
  ExactLinearSolution(const LinearProblem& problem, double omega, double check_span = 5.0);

  CVector operator()(double t) const;
  CVector derivative(double t) const;
  /// |y'(t) - A y(t) - forcing(t)|_inf.
  double residual(double t) const;
  double omega() const { return omega_; }

 private:
  CVector forcing(double t) const;

  LinearProblem problem_;
  double omega_;
  CVector homogeneous_;                          // y0 - sum_m q_m(0)
  std::vector<std::vector<CVector>> particular_;  // q_m coefficients
};

}  // namespace oscillode
