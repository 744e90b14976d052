#include "oscillode/linear_closed_form.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {

namespace {

double falling(int j, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= static_cast<double>(j - i);
  return f;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * static_cast<double>(n - k + i) / static_cast<double>(i);
  return b;
}

CVector polynomial_derivative(const std::vector<CVector>& coefficients, int order, double t) {
  CVector out = CVector::Zero(coefficients.front().size());
  // Horner over the surviving coefficients
  for (int j = static_cast<int>(coefficients.size()) - 1; j >= order; --j) {
    out = out * t + falling(j, order) * coefficients[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

void LinearProblem::validate() const {
  const Eigen::Index d = matrix.rows();
  if (matrix.cols() != d) throw std::invalid_argument("linear problem needs a square matrix");
  if (y0.size() != d) throw std::invalid_argument("y0 does not match the matrix");
  if (kappas.empty() || kappas.size() != amplitudes.size()) {
    throw std::invalid_argument("linear problem needs one amplitude polynomial per frequency");
  }
  for (const auto& coefficients : amplitudes) {
    if (coefficients.empty()) throw std::invalid_argument("amplitude polynomial has no coefficients");
    for (const CVector& c : coefficients) {
      if (c.size() != d) throw std::invalid_argument("amplitude coefficient has the wrong dimension");
    }
  }
}

CVector LinearProblem::amplitude_derivative(int m, int j, double t) const {
  return polynomial_derivative(amplitudes.at(static_cast<std::size_t>(m - 1)), j, t);
}

// ---------------------------------------------------------------------------

CMatrix matrix_exponential(const CMatrix& matrix, double t) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("matrix exponential needs a square matrix");
  const Eigen::Index n = matrix.rows();
  if (n == 0) return matrix;
  static constexpr double kB[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                  1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                  670442572800.0,      33522128640.0,       1323241920.0,
                                  40840800.0,          960960.0,            16380.0,
                                  182.0,               1.0};
  constexpr double kTheta13 = 5.371920351148152;

  CMatrix x = t * matrix;
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    x /= std::ldexp(1.0, squarings);
  }

  const CMatrix identity = CMatrix::Identity(n, n);
  const CMatrix x2 = x * x;
  const CMatrix x4 = x2 * x2;
  const CMatrix x6 = x4 * x2;
  const CMatrix u = x * (x6 * (kB[13] * x6 + kB[11] * x4 + kB[9] * x2) + kB[7] * x6 + kB[5] * x4 + kB[3] * x2 +
                         kB[1] * identity);
  const CMatrix v =
      x6 * (kB[12] * x6 + kB[10] * x4 + kB[8] * x2) + kB[6] * x6 + kB[4] * x4 + kB[2] * x2 + kB[0] * identity;
  CMatrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

// ---------------------------------------------------------------------------

LinearCoefficients::LinearCoefficients(LinearProblem problem, int order)
    : problem_(std::move(problem)), order_(order) {
  problem_.validate();
  if (order_ < 0) throw std::invalid_argument("order must be nonnegative");
  const Eigen::Index d = problem_.matrix.rows();
  powers_.push_back(CMatrix::Identity(d, d));
  for (int k = 1; k <= order_; ++k) powers_.push_back(powers_.back() * problem_.matrix);

  level_start_.assign(static_cast<std::size_t>(order_) + 1, CVector::Zero(d));
  for (int r = 1; r <= order_; ++r) {
    for (int m = 1; m <= static_cast<int>(problem_.kappas.size()); ++m) {
      level_start_[static_cast<std::size_t>(r)] += oscillatory(r, m, 0.0);
    }
  }
}

CVector LinearCoefficients::oscillatory(int r, int m, double t) const {
  const Eigen::Index d = problem_.matrix.rows();
  CVector sum = CVector::Zero(d);
  for (int l = 0; l <= r - 1; ++l) {
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    sum += (sign * binomial(r - 1, l)) * (powers_[static_cast<std::size_t>(r - 1 - l)] *
                                          problem_.amplitude_derivative(m, l, t));
  }
  const Complex ik(0.0, problem_.kappas[static_cast<std::size_t>(m - 1)]);
  return sum / std::pow(ik, r);
}

CVector LinearCoefficients::value(int r, int m, double t) const {
  const int M = static_cast<int>(problem_.kappas.size());
  if (r < 0 || r > order_ || m < 0 || m > M || (r == 0 && m != 0)) {
    throw std::out_of_range(fmt::format("no linear coefficient ({}, {})", r, m));
  }
  if (m != 0) return oscillatory(r, m, t);
  const CMatrix propagator = matrix_exponential(problem_.matrix, t);
  if (r == 0) return propagator * problem_.y0;
  return -(propagator * level_start_[static_cast<std::size_t>(r)]);
}

// ---------------------------------------------------------------------------

ExactLinearSolution::ExactLinearSolution(const LinearProblem& problem, double omega, double check_span)
    : problem_(problem), omega_(omega) {
  problem_.validate();
  const Eigen::Index d = problem_.matrix.rows();
  homogeneous_ = problem_.y0;
  for (std::size_t m = 0; m < problem_.kappas.size(); ++m) {
    const double eta = problem_.kappas[m] * omega_;
    const CMatrix resolvent = Complex(0.0, eta) * CMatrix::Identity(d, d) - problem_.matrix;
    const Eigen::PartialPivLU<CMatrix> lu(resolvent);
    if (!(lu.rcond() > 1e-13)) {
      throw SingularResolvent(fmt::format("i*{}*omega I - A is singular (rcond {:.3e})", problem_.kappas[m], lu.rcond()));
    }
    const auto& c = problem_.amplitudes[m];
    std::vector<CVector> q(c.size(), CVector::Zero(d));
    // highest degree first: q_j = R^{-1}(c_j - (j+1) q_{j+1})
    for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) {
      CVector rhs = c[static_cast<std::size_t>(j)];
      if (j + 1 < static_cast<int>(c.size())) rhs -= static_cast<double>(j + 1) * q[static_cast<std::size_t>(j + 1)];
      q[static_cast<std::size_t>(j)] = lu.solve(rhs);
    }
    homogeneous_ -= q[0];
    particular_.push_back(std::move(q));
  }

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pick(0.0, check_span);
  for (int i = 0; i < 20; ++i) {
    const double t = pick(rng);
    const double scale = 1.0 + (*this)(t).lpNorm<Eigen::Infinity>();
    const double res = residual(t);
    if (!(res <= 1e-10 * scale)) {
      throw ValidationFailed(fmt::format("exact linear solution residual {:.3e} at t = {}", res, t));
    }
  }
}

CVector ExactLinearSolution::operator()(double t) const {
  CVector y = matrix_exponential(problem_.matrix, t) * homogeneous_;
  for (std::size_t m = 0; m < particular_.size(); ++m) {
    y += polynomial_derivative(particular_[m], 0, t) * oscillation(problem_.kappas[m], omega_, t);
  }
  return y;
}

CVector ExactLinearSolution::derivative(double t) const {
  CVector dy = problem_.matrix * (matrix_exponential(problem_.matrix, t) * homogeneous_);
  for (std::size_t m = 0; m < particular_.size(); ++m) {
    const Complex i_eta(0.0, problem_.kappas[m] * omega_);
    dy += (polynomial_derivative(particular_[m], 1, t) + i_eta * polynomial_derivative(particular_[m], 0, t)) *
          oscillation(problem_.kappas[m], omega_, t);
  }
  return dy;
}

CVector ExactLinearSolution::forcing(double t) const {
  CVector total = CVector::Zero(problem_.y0.size());
  for (std::size_t m = 0; m < problem_.kappas.size(); ++m) {
    total += problem_.amplitude_derivative(static_cast<int>(m + 1), 0, t) * oscillation(problem_.kappas[m], omega_, t);
  }
  return total;
}

double ExactLinearSolution::residual(double t) const {
  return (derivative(t) - problem_.matrix * (*this)(t) - forcing(t)).lpNorm<Eigen::Infinity>();
}

}  // namespace oscillode
