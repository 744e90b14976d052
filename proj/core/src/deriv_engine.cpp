#include "oscillode/deriv_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {

CVector VectorField::differential(const CVector& y, std::span<const CVector> directions) const {
  const int order = static_cast<int>(directions.size());
  if (order == 0) return evaluate(y);
  if (order > max_order()) {
    throw UnsupportedOrder(fmt::format("differential of order {} requested, field supports up to {}", order,
                                       max_order()));
  }
  return compute_differential(y, directions);
}

// ---------------------------------------------------------------------------

LinearField::LinearField(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("linear field needs a square matrix");
}

CVector LinearField::compute_differential(const CVector& y, std::span<const CVector> directions) const {
  if (directions.size() == 1) return matrix_ * directions[0];
  return CVector::Zero(y.size());
}

// ---------------------------------------------------------------------------

PolynomialField::PolynomialField(Eigen::Index dimension, std::vector<Monomial> monomials)
    : dimension_(dimension), monomials_(std::move(monomials)) {
  for (const Monomial& m : monomials_) {
    if (m.component < 0 || m.component >= dimension_ ||
        static_cast<Eigen::Index>(m.exponents.size()) != dimension_) {
      throw std::invalid_argument("monomial does not match field dimension");
    }
    if (std::any_of(m.exponents.begin(), m.exponents.end(), [](int e) { return e < 0; })) {
      throw std::invalid_argument("monomial exponents must be nonnegative");
    }
  }
}

CVector PolynomialField::evaluate(const CVector& y) const {
  CVector out = CVector::Zero(dimension_);
  for (const Monomial& m : monomials_) {
    Complex value = m.coefficient;
    for (Eigen::Index j = 0; j < dimension_; ++j) value *= std::pow(y[j], m.exponents[static_cast<std::size_t>(j)]);
    out[m.component] += value;
  }
  return out;
}

namespace {

// Sum over assignments of directions to variables in the monomial's support.
Complex monomial_differential(const PolynomialField::Monomial& m, const CVector& y,
                              std::span<const CVector> directions, std::vector<int>& taken, std::size_t next) {
  if (next == directions.size()) {
    Complex value = m.coefficient;
    for (std::size_t j = 0; j < taken.size(); ++j) {
      const int e = m.exponents[j];
      const int c = taken[j];
      for (int k = 0; k < c; ++k) value *= static_cast<double>(e - k);
      if (e - c > 0) value *= std::pow(y[static_cast<Eigen::Index>(j)], e - c);
    }
    return value;
  }
  Complex total{0.0, 0.0};
  for (std::size_t j = 0; j < taken.size(); ++j) {
    if (taken[j] >= m.exponents[j]) continue;
    const Complex component = directions[next][static_cast<Eigen::Index>(j)];
    if (component == Complex{0.0, 0.0}) continue;
    ++taken[j];
    total += component * monomial_differential(m, y, directions, taken, next + 1);
    --taken[j];
  }
  return total;
}

}  // namespace

CVector PolynomialField::compute_differential(const CVector& y, std::span<const CVector> directions) const {
  CVector out = CVector::Zero(dimension_);
  std::vector<int> taken(static_cast<std::size_t>(dimension_), 0);
  for (const Monomial& m : monomials_) {
    out[m.component] += monomial_differential(m, y, directions, taken, 0);
  }
  return out;
}

// ---------------------------------------------------------------------------

ForcingTerm::ForcingTerm(int frequency_index, DerivativeFn derivative, int max_derivative_order)
    : frequency_index_(frequency_index),
      derivative_(std::move(derivative)),
      max_derivative_order_(max_derivative_order) {
  if (frequency_index_ < 1) throw std::invalid_argument("forcing frequency index must be >= 1");
  if (!derivative_) throw std::invalid_argument("forcing term needs an amplitude function");
}

ForcingTerm ForcingTerm::polynomial(int frequency_index, std::vector<CVector> coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("polynomial amplitude needs coefficients");
  auto fn = [coefficients = std::move(coefficients)](int order, double t) {
    CVector out = CVector::Zero(coefficients.front().size());
    for (std::size_t j = static_cast<std::size_t>(order); j < coefficients.size(); ++j) {
      double factor = 1.0;
      for (int k = 0; k < order; ++k) factor *= static_cast<double>(j - static_cast<std::size_t>(k));
      out += coefficients[j] * (factor * std::pow(t, static_cast<double>(j) - order));
    }
    return out;
  };
  return ForcingTerm(frequency_index, std::move(fn), kUnboundedOrder);
}

ForcingTerm ForcingTerm::constant(int frequency_index, CVector value) {
  return polynomial(frequency_index, {std::move(value)});
}

CVector ForcingTerm::derivative(int order, double t) const {
  if (order < 0) throw std::invalid_argument("negative derivative order");
  if (order > max_derivative_order_) {
    throw UnsupportedOrder(fmt::format("amplitude derivative of order {} requested for forcing {}, supported up to {}",
                                       order, frequency_index_, max_derivative_order_));
  }
  return derivative_(order, t);
}

// ---------------------------------------------------------------------------

CVector fd_differential(const VectorField& field, const CVector& y, std::span<const CVector> directions,
                        double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const std::size_t n = directions.size();
  if (n > 4) throw std::invalid_argument("finite-difference differential supports order <= 4");
  if (n == 0) return field.evaluate(y);

  CVector total = CVector::Zero(y.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    CVector point = y;
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        point -= h * directions[i];
        sign = -sign;
      } else {
        point += h * directions[i];
      }
    }
    total += sign * field.evaluate(point);
  }
  return total / std::pow(2.0 * h, static_cast<double>(n));
}

ValidationReport validate_field(const VectorField& field, std::span<const ValidationSample> samples,
                                double threshold) {
  if (field.max_order() < 1) throw std::invalid_argument("field exposes no differentials to validate");
  // steps balance truncation against cancellation at each order
  constexpr double kSteps[] = {0.0, 1e-3, 2e-3, 1e-2, 2e-2};

  ValidationReport report;
  std::vector<ValidationEntry> failures;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const ValidationSample& sample = samples[s];
    const int top = std::min({field.max_order(), 4, static_cast<int>(sample.directions.size())});
    for (int order = 1; order <= top; ++order) {
      std::span<const CVector> dirs(sample.directions.data(), static_cast<std::size_t>(order));
      const CVector analytic = field.differential(sample.y, dirs);
      const double h = kSteps[order];
      const CVector coarse = fd_differential(field, sample.y, dirs, h);
      const CVector fine = fd_differential(field, sample.y, dirs, h / 2.0);
      const CVector extrapolated = (4.0 * fine - coarse) / 3.0;
      const double deviation =
          (analytic - extrapolated).lpNorm<Eigen::Infinity>() / (1.0 + analytic.lpNorm<Eigen::Infinity>());
      ValidationEntry entry{s, order, deviation};
      report.entries.push_back(entry);
      report.max_deviation = std::max(report.max_deviation, deviation);
      if (deviation > threshold) failures.push_back(entry);
    }
  }
  if (!failures.empty()) {
    std::string message = "differential validation failed:";
    for (const ValidationEntry& e : failures) {
      message += fmt::format(" [sample {} order {} deviation {:.3e}]", e.sample, e.order, e.deviation);
    }
    throw ValidationFailed(message);
  }
  return report;
}

}  // namespace oscillode
