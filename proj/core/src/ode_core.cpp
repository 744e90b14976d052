#include "oscillode/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {
namespace {

// Fehlberg tableau.
constexpr double kC2 = 1.0 / 4.0, kC3 = 3.0 / 8.0, kC4 = 12.0 / 13.0, kC5 = 1.0, kC6 = 1.0 / 2.0;
constexpr double kA21 = 1.0 / 4.0;
constexpr double kA31 = 3.0 / 32.0, kA32 = 9.0 / 32.0;
constexpr double kA41 = 1932.0 / 2197.0, kA42 = -7200.0 / 2197.0, kA43 = 7296.0 / 2197.0;
constexpr double kA51 = 439.0 / 216.0, kA52 = -8.0, kA53 = 3680.0 / 513.0, kA54 = -845.0 / 4104.0;
constexpr double kA61 = -8.0 / 27.0, kA62 = 2.0, kA63 = -3544.0 / 2565.0, kA64 = 1859.0 / 4104.0,
                 kA65 = -11.0 / 40.0;
// fifth-order weights
constexpr double kB1 = 16.0 / 135.0, kB3 = 6656.0 / 12825.0, kB4 = 28561.0 / 56430.0, kB5 = -9.0 / 50.0,
                 kB6 = 2.0 / 55.0;
// fifth minus fourth order weights
constexpr double kE1 = 1.0 / 360.0, kE3 = -128.0 / 4275.0, kE4 = -2197.0 / 75240.0, kE5 = 1.0 / 50.0,
                 kE6 = 2.0 / 55.0;

double scaled_rms(const CVector& v, const CVector& y, double abs_tol, double rel_tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double scale = abs_tol + rel_tol * std::abs(y[i]);
    const double q = std::abs(v[i]) / scale;
    sum += q * q;
  }
  return v.size() == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(v.size()));
}

}  // namespace

CVector DenseSolution::state(std::size_t i) const {
  return Eigen::Map<const CVector>(states_.data() + i * static_cast<std::size_t>(dimension_), dimension_);
}

CVector DenseSolution::derivative(std::size_t i) const {
  return Eigen::Map<const CVector>(derivs_.data() + i * static_cast<std::size_t>(dimension_), dimension_);
}

void DenseSolution::append(double t, const CVector& y, const CVector& f, const CVector* second) {
  times_.push_back(t);
  states_.insert(states_.end(), y.data(), y.data() + y.size());
  derivs_.insert(derivs_.end(), f.data(), f.data() + f.size());
  if (second != nullptr) second_.insert(second_.end(), second->data(), second->data() + second->size());
}

std::size_t DenseSolution::memory_bytes() const {
  return times_.size() * sizeof(double) +
         (states_.size() + derivs_.size() + second_.size()) * sizeof(Complex);
}

CVector DenseSolution::sample(double t) const {
  if (times_.empty()) throw OutOfDomain("sampling an empty solution");
  const double lo = times_.front();
  const double hi = times_.back();
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!(t >= lo - slack && t <= hi + slack)) {
    throw OutOfDomain(fmt::format("t = {} outside solved interval [{}, {}]", t, lo, hi));
  }
  t = std::clamp(t, lo, hi);

  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t right = static_cast<std::size_t>(it - times_.begin());
  if (right == times_.size()) return state(times_.size() - 1);
  const std::size_t left = right - 1;
  if (times_[left] == t) return state(left);

  const double h = times_[right] - times_[left];
  const double s = (t - times_[left]) / h;
  const auto n = static_cast<std::size_t>(dimension_);
  const Eigen::Map<const CVector> y0(states_.data() + left * n, dimension_);
  const Eigen::Map<const CVector> y1(states_.data() + right * n, dimension_);
  const Eigen::Map<const CVector> f0(derivs_.data() + left * n, dimension_);
  const Eigen::Map<const CVector> f1(derivs_.data() + right * n, dimension_);

  const double s2 = s * s, s3 = s2 * s;
  if (second_.empty()) {
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
  }

  const Eigen::Map<const CVector> g0(second_.data() + left * n, dimension_);
  const Eigen::Map<const CVector> g1(second_.data() + right * n, dimension_);
  const double s4 = s3 * s, s5 = s4 * s;
  const double b0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  const double b1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double b2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
  const double b3 = 0.5 * (s3 - 2 * s4 + s5);
  const double b4 = -4 * s3 + 7 * s4 - 3 * s5;
  const double b5 = 10 * s3 - 15 * s4 + 6 * s5;
  return b0 * y0 + (b1 * h) * f0 + (b2 * h * h) * g0 + (b3 * h * h) * g1 + (b4 * h) * f1 + b5 * y1;
}

DenseSolution integrate(const IvpSpec& spec) {
  if (!spec.rhs) throw std::invalid_argument("IVP needs a right-hand side");
  if (!(spec.t_end > spec.t_begin)) throw std::invalid_argument("IVP needs t_end > t_begin");
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (!(spec.max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (!std::is_sorted(spec.output_times.begin(), spec.output_times.end())) {
    throw std::invalid_argument("output times must be sorted");
  }

  DenseSolution solution;
  solution.dimension_ = spec.y0.size();
  SolverStats& stats = solution.stats_;

  auto rhs = [&](double t, const CVector& y) {
    ++stats.rhs_evaluations;
    CVector f = spec.rhs(t, y);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) {
        throw StepUnderflow(fmt::format("non-finite right-hand side at t = {}", t));
      }
    }
    return f;
  };
  auto record = [&](double t, const CVector& y, const CVector& f) {
    if (spec.second_derivative) {
      const CVector g = spec.second_derivative(t, y, f);
      solution.append(t, y, f, &g);
    } else {
      solution.append(t, y, f, nullptr);
    }
  };

  // stop points strictly inside (t_begin, t_end], ending with t_end
  std::vector<double> stops;
  for (double t : spec.output_times) {
    if (t > spec.t_begin && t < spec.t_end) stops.push_back(t);
  }
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(spec.t_end);
  std::size_t next_stop = 0;

  double t = spec.t_begin;
  CVector y = spec.y0;
  CVector f = rhs(t, y);
  record(t, y, f);

  // initial step (Hairer, Norsett & Wanner II.4)
  double h;
  {
    const double d0 = scaled_rms(y, y, spec.abs_tol, spec.rel_tol);
    const double d1 = scaled_rms(f, y, spec.abs_tol, spec.rel_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, spec.t_end - spec.t_begin);
    const CVector y1 = y + h0 * f;
    const CVector f1 = rhs(t + h0, y1);
    const double d2 = scaled_rms(f1 - f, y, spec.abs_tol, spec.rel_tol) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, spec.max_step});
  }

  const Eigen::Index n = y.size();
  CVector k2(n), k3(n), k4(n), k5(n), k6(n), stage(n), y_new(n), err(n);

  while (true) {
    if (stats.accepted_steps + stats.rejected_steps >= spec.max_steps) {
      throw MaxStepsExceeded(fmt::format("exceeded {} steps at t = {}", spec.max_steps, t));
    }
    const double target = stops[next_stop];
    bool lands = false;
    if (t + h >= target - 1e-13 * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw StepUnderflow(fmt::format("step size underflow at t = {} (h = {:.3e})", t, h));
    }

    stage = y + (h * kA21) * f;
    k2 = rhs(t + kC2 * h, stage);
    stage = y + h * (kA31 * f + kA32 * k2);
    k3 = rhs(t + kC3 * h, stage);
    stage = y + h * (kA41 * f + kA42 * k2 + kA43 * k3);
    k4 = rhs(t + kC4 * h, stage);
    stage = y + h * (kA51 * f + kA52 * k2 + kA53 * k3 + kA54 * k4);
    k5 = rhs(t + kC5 * h, stage);
    stage = y + h * (kA61 * f + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    k6 = rhs(t + kC6 * h, stage);

    y_new = y + h * (kB1 * f + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    err = h * (kE1 * f + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = spec.abs_tol + spec.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / scale);
    }
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    if (err_norm <= 1.0) {
      ++stats.accepted_steps;
      t = lands ? target : t + h;
      y = y_new;
      f = rhs(t, y);
      const bool at_stop = lands;
      if (spec.dense || at_stop) record(t, y, f);
      if (at_stop) {
        ++next_stop;
        if (next_stop == stops.size()) break;
      }
      const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      // a step truncated to hit a stop says nothing about the natural step size
      h = std::min(h * factor, spec.max_step);
    } else {
      ++stats.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
    }
  }
  return solution;
}

}  // namespace oscillode
