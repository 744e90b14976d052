#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oscillode {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr int kUnboundedOrder = std::numeric_limits<int>::max();

/// e^{i frequency omega t}. Every caller forms the phase in this order so that
/// expansion and reference see identical rounding.
inline Complex oscillation(double frequency, double omega, double t) {
  return std::polar(1.0, (frequency * omega) * t);
}

/// Autonomous vector field f: C^d -> C^d together with its multilinear
/// differentials f_n(y)[v_1, ..., v_n].
///
/// Implementations must be pure: no state observable across calls.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual Eigen::Index dimension() const = 0;
  /// Highest n for which differential() is available.
  virtual int max_order() const = 0;

  virtual CVector evaluate(const CVector& y) const = 0;

  /// f_n(y)[directions...] with n = directions.size(); n == 0 gives f(y).
  /// Throws UnsupportedOrder when n > max_order().
  CVector differential(const CVector& y, std::span<const CVector> directions) const;

 protected:
  /// Called with 1 <= directions.size() <= max_order().
  virtual CVector compute_differential(const CVector& y, std::span<const CVector> directions) const = 0;
};

/// f(y) = A y. All differentials of order >= 2 vanish.
class LinearField final : public VectorField {
 public:
  explicit LinearField(CMatrix matrix);

  Eigen::Index dimension() const override { return matrix_.rows(); }
  int max_order() const override { return kUnboundedOrder; }
  CVector evaluate(const CVector& y) const override { return matrix_ * y; }
  const CMatrix& matrix() const { return matrix_; }

 protected:
  CVector compute_differential(const CVector& y, std::span<const CVector> directions) const override;

 private:
  CMatrix matrix_;
};

/// Sum of monomials per component, f_i(y) = sum_k c_k prod_j y_j^{e_kj}.
class PolynomialField final : public VectorField {
 public:
  struct Monomial {
    Eigen::Index component = 0;
    Complex coefficient{1.0, 0.0};
    std::vector<int> exponents;  // one per state variable
  };

  PolynomialField(Eigen::Index dimension, std::vector<Monomial> monomials);

  Eigen::Index dimension() const override { return dimension_; }
  int max_order() const override { return kUnboundedOrder; }
  CVector evaluate(const CVector& y) const override;
  const std::vector<Monomial>& monomials() const { return monomials_; }

 protected:
  CVector compute_differential(const CVector& y, std::span<const CVector> directions) const override;

 private:
  Eigen::Index dimension_;
  std::vector<Monomial> monomials_;
};

/// Amplitude a_m(t) of the forcing term a_m(t) e^{i kappa_m omega t} and its
/// time derivatives.
class ForcingTerm {
 public:
  using DerivativeFn = std::function<CVector(int order, double t)>;

  ForcingTerm(int frequency_index, DerivativeFn derivative, int max_derivative_order);

  /// a(t) = sum_j coefficients[j] t^j; every derivative order is available.
  static ForcingTerm polynomial(int frequency_index, std::vector<CVector> coefficients);
  static ForcingTerm constant(int frequency_index, CVector value);

  int frequency_index() const { return frequency_index_; }
  int max_derivative_order() const { return max_derivative_order_; }

  CVector amplitude(double t) const { return derivative(0, t); }
  /// Throws UnsupportedOrder beyond max_derivative_order().
  CVector derivative(int order, double t) const;

 private:
  int frequency_index_;
  DerivativeFn derivative_;
  int max_derivative_order_;
};

/// n-fold nested central difference of f along the given directions:
/// (2h)^{-n} sum_{s in {+-1}^n} (prod s_i) f(y + h sum s_i v_i). O(h^2).
/// Test oracle only; never used on the production path.
CVector fd_differential(const VectorField& field, const CVector& y, std::span<const CVector> directions,
                        double h);

struct ValidationSample {
  CVector y;
  std::vector<CVector> directions;  // orders 1..directions.size() are probed
};

struct ValidationEntry {
  std::size_t sample = 0;
  int order = 0;
  double deviation = 0.0;  // |analytic - fd| / (1 + |analytic|), infinity norms
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  double max_deviation = 0.0;
};

/// Compares field.differential against Richardson-extrapolated finite
/// differences at every order up to min(max_order, 4, #directions). Throws
/// ValidationFailed listing every entry whose deviation exceeds `threshold`.
ValidationReport validate_field(const VectorField& field, std::span<const ValidationSample> samples,
                                double threshold = 1e-5);

}  // namespace oscillode
