#include "oscillode/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "oscillode/errors.hpp"

namespace oscillode {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string cache_key(const RegisteredProblem& problem, double omega, const std::vector<double>& grid,
                      const ReferenceOptions& options) {
  const Problem& p = *problem.problem;
  std::vector<std::string> kappas;
  for (int m = 1; m <= p.forcing_count(); ++m) kappas.push_back(fmt::format("{:.17g}", p.frequencies.kappa(m).value));
  std::vector<std::string> y0;
  for (Eigen::Index i = 0; i < p.y0.size(); ++i) y0.push_back(fmt::format("{:.17g},{:.17g}", p.y0[i].real(), p.y0[i].imag()));
  return fmt::format("{} omega={:.17g} abs={:.17g} rel={:.17g} t_end={:.17g} grid={} kappa=[{}] y0=[{}]", problem.name,
                     omega, options.abs_tol, options.rel_tol, grid.back(), grid.size(), fmt::join(kappas, " "),
                     fmt::join(y0, " "));
}

std::optional<std::vector<CVector>> read_cache(const std::filesystem::path& path, const std::string& key,
                                               std::size_t points, Eigen::Index dimension) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string header;
  if (!std::getline(in, header) || header != key) return std::nullopt;
  std::vector<CVector> states;
  for (std::size_t i = 0; i < points; ++i) {
    CVector y(dimension);
    for (Eigen::Index k = 0; k < dimension; ++k) {
      double re = 0.0, im = 0.0;
      if (!(in >> re >> im)) return std::nullopt;
      y[k] = {re, im};
    }
    states.push_back(std::move(y));
  }
  return states;
}

void write_cache(const std::filesystem::path& path, const std::string& key, const std::vector<CVector>& states) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path partial = path.string() + ".tmp";
  {
    std::ofstream out(partial);
    if (!out) throw std::runtime_error(fmt::format("cannot write reference cache '{}'", partial.string()));
    out << key << '\n';
    for (const CVector& y : states) {
      std::vector<std::string> fields;
      for (Eigen::Index k = 0; k < y.size(); ++k) fields.push_back(fmt::format("{:.17g} {:.17g}", y[k].real(), y[k].imag()));
      out << fmt::format("{}\n", fmt::join(fields, " "));
    }
  }
  std::filesystem::rename(partial, path);
}

int resolve_order(const RegisteredProblem& problem, const ErrorStudyOptions& options, std::vector<int>& orders) {
  orders = options.orders.empty() ? problem.orders : options.orders;
  if (orders.empty()) throw std::invalid_argument("error study needs at least one truncation order");
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  if (orders.front() < 0) throw std::invalid_argument("truncation orders must be nonnegative");
  return orders.back();
}

std::string svg_number(double value) { return fmt::format("{:.6g}", value); }

}  // namespace

std::vector<double> uniform_grid(double t_end, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  if (!(t_end > 0.0)) throw std::invalid_argument("grid needs t_end > 0");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = t_end * i / (points - 1);
  grid.back() = t_end;
  return grid;
}

ReferenceTrajectory compute_reference(const RegisteredProblem& problem, double omega, const std::vector<double>& grid,
                                      const ReferenceOptions& options) {
  if (grid.empty()) throw std::invalid_argument("reference needs a grid");
  ReferenceTrajectory result;
  result.grid = grid;

  if (problem.linear && !options.force_rk) {
    const ExactLinearSolution exact(*problem.linear, omega, grid.back());
    for (double t : grid) result.states.push_back(exact(t));
    result.provenance = "exact";
    return result;
  }

  result.provenance = fmt::format("rk abs={:g} rel={:g}", options.abs_tol, options.rel_tol);
  const Problem& p = *problem.problem;
  std::optional<std::filesystem::path> path;
  std::string key;
  if (options.cache_dir) {
    key = cache_key(problem, omega, grid, options);
    path = *options.cache_dir / fmt::format("{}-{:016x}.ref", problem.name, fnv1a(key));
    if (auto cached = read_cache(*path, key, grid.size(), p.dimension())) {
      result.states = std::move(*cached);
      result.from_cache = true;
      return result;
    }
  }

  IvpSpec spec;
  spec.y0 = p.y0;
  spec.t_begin = grid.front();
  spec.t_end = grid.back();
  spec.abs_tol = options.abs_tol;
  spec.rel_tol = options.rel_tol;
  spec.output_times = grid;
  spec.dense = false;
  spec.rhs = [&p, omega](double t, const CVector& y) {
    CVector f = p.field->evaluate(y);
    for (int m = 1; m <= p.forcing_count(); ++m) {
      f += p.forcings[static_cast<std::size_t>(m - 1)].amplitude(t) *
           oscillation(p.frequencies.kappa(m).value, omega, t);
    }
    return f;
  };
  const DenseSolution solution = integrate(spec);
  for (double t : grid) result.states.push_back(solution.sample(t));
  result.stats = solution.stats();
  result.memory_bytes = solution.memory_bytes();
  if (path) write_cache(*path, key, result.states);
  return result;
}

// ---------------------------------------------------------------------------

ErrorReport run_error_study(const RegisteredProblem& problem, const ErrorStudyOptions& options) {
  std::vector<int> orders;
  const int R = resolve_order(problem, options, orders);
  Expansion expansion = build_expansion(problem.problem, R);
  solve_nonoscillatory_chain(expansion, options.t_end.value_or(problem.t_end), options.chain);
  ErrorReport report = run_error_study(problem, expansion, options);
  report.expansion_builds = 1;
  return report;
}

ErrorReport run_error_study(const RegisteredProblem& problem, const Expansion& expansion,
                            const ErrorStudyOptions& options) {
  if (options.omegas.empty()) throw std::invalid_argument("error study needs at least one omega");
  std::vector<int> orders;
  const int R = resolve_order(problem, options, orders);
  if (R > expansion.order()) {
    throw std::invalid_argument(fmt::format("order {} exceeds the expansion order {}", R, expansion.order()));
  }

  ErrorReport report;
  report.problem = problem.name;
  report.grid = uniform_grid(options.t_end.value_or(problem.t_end), options.grid);

  std::vector<CoefficientSample> samples;
  samples.reserve(report.grid.size());
  for (double t : report.grid) samples.push_back(sample_coefficients(expansion, t));

  const Eigen::Index d = expansion.problem().dimension();
  for (double omega : options.omegas) {
    const ReferenceTrajectory reference = compute_reference(problem, omega, report.grid, options.reference);
    report.reference_provenance.push_back(reference.provenance);
    for (int s : orders) {
      ErrorCurve curve;
      curve.omega = omega;
      curve.s = s;
      curve.component_sup.assign(static_cast<std::size_t>(d), 0.0);
      for (std::size_t i = 0; i < report.grid.size(); ++i) {
        CVector error = reference.states[i] - combine(expansion, samples[i], omega, s);
        for (Eigen::Index k = 0; k < d; ++k) {
          auto& sup = curve.component_sup[static_cast<std::size_t>(k)];
          sup = std::max(sup, std::abs(error[k]));
        }
        curve.errors.push_back(std::move(error));
      }
      curve.sup = *std::max_element(curve.component_sup.begin(), curve.component_sup.end());
      report.curves.push_back(std::move(curve));
    }
  }
  return report;
}

std::string format_error_csv(const ErrorReport& report) {
  std::string out = "t,omega,s,component,err_re,err_im\n";
  for (const ErrorCurve& curve : report.curves) {
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
      const CVector& error = curve.errors[i];
      for (Eigen::Index k = 0; k < error.size(); ++k) {
        out += fmt::format("{:.17g},{:.17g},{},{},{:.17g},{:.17g}\n", report.grid[i], curve.omega, curve.s, k + 1,
                           error[k].real(), error[k].imag());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string render_svg(const ErrorReport& report, const ErrorCurve& curve) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  const double t0 = report.grid.front();
  const double t1 = report.grid.back();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const CVector& e : curve.errors) {
    for (Eigen::Index k = 0; k < e.size(); ++k) {
      lo = std::min(lo, e[k].real());
      hi = std::max(hi, e[k].real());
    }
  }
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(hi), 1e-300);
    lo -= pad;
    hi += pad;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](double t) { return kLeft + plot_w * (t - t0) / (t1 - t0); };
  auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", kWidth,
      kHeight, kWidth, kHeight);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += fmt::format("<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}: "
                     "Re eps_{}(t), omega = {}</text>\n",
                     kLeft + plot_w / 2, report.problem, curve.s, svg_number(curve.omega));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, plot_w, plot_h);
  for (int i = 0; i <= 4; ++i) {
    const double t = t0 + (t1 - t0) * i / 4;
    const double v = lo + (hi - lo) * i / 4;
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"middle\">{}</text>\n",
                       svg_number(x_of(t)), svg_number(kTop + plot_h + 16), svg_number(t));
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{}</text>\n",
                       svg_number(kLeft - 6), svg_number(y_of(v) + 4), fmt::format("{:.3g}", v));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" "
                     "text-anchor=\"middle\">t</text>\n",
                     svg_number(kLeft + plot_w / 2), svg_number(kHeight - 10));
  out += fmt::format("<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 16 {})\">Re error</text>\n",
                     svg_number(kTop + plot_h / 2), svg_number(kTop + plot_h / 2));

  const Eigen::Index d = curve.errors.empty() ? 0 : curve.errors.front().size();
  for (Eigen::Index k = 0; k < d; ++k) {
    std::string points;
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
      if (!points.empty()) points += ' ';
      points += svg_number(x_of(report.grid[i])) + "," + svg_number(y_of(curve.errors[i][k].real()));
    }
    const char* color = kColors[static_cast<std::size_t>(k) % std::size(kColors)];
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"{}\"/>\n", color, points);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">y{}</text>\n",
                       svg_number(kLeft + 8 + 40 * static_cast<double>(k)), svg_number(kTop + 14), color, k + 1);
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> emit_svg(const ErrorReport& report, const std::filesystem::path& directory) {
  if (report.curves.empty()) throw std::invalid_argument("error report has no curves to plot");
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  for (const ErrorCurve& curve : report.curves) {
    const auto path = directory / fmt::format("{}_s{}_omega{}.svg", report.problem, curve.s, svg_number(curve.omega));
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << render_svg(report, curve);
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------

std::vector<SlopeFit> fit_slopes(const ErrorReport& report, double tolerance) {
  std::map<int, SlopeFit> fits;
  for (const ErrorCurve& curve : report.curves) {
    SlopeFit& fit = fits[curve.s];
    fit.s = curve.s;
    fit.omegas.push_back(curve.omega);
    fit.sups.push_back(curve.sup);
  }
  std::vector<SlopeFit> out;
  for (auto& [s, fit] : fits) {
    const std::size_t n = fit.omegas.size();
    if (n < 2) throw std::invalid_argument("slope fit needs at least two omegas");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(fit.omegas[i]);
      const double y = std::log(fit.sups[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / static_cast<double>(n);
    fit.expected = -(s + 1.0);
    fit.within = std::abs(fit.slope - fit.expected) <= tolerance;
    out.push_back(fit);
  }
  return out;
}

// ---------------------------------------------------------------------------

CostReport compare_cost(const RegisteredProblem& problem, const std::vector<double>& omegas, int s,
                        const CostOptions& options) {
  if (omegas.empty()) throw std::invalid_argument("cost comparison needs at least one omega");
  CostReport report;
  report.problem = problem.name;
  report.s = s;
  const std::vector<double> grid = uniform_grid(options.t_end.value_or(problem.t_end), options.grid);

  const long builds_before = expansion_build_count();
  const auto build_start = Clock::now();
  Expansion expansion = build_expansion(problem.problem, s);
  solve_nonoscillatory_chain(expansion, grid.back(), options.chain);
  report.build_seconds = seconds_since(build_start);

  ReferenceOptions reference;
  reference.abs_tol = options.abs_tol;
  reference.rel_tol = options.rel_tol;
  reference.force_rk = true;

  for (double omega : omegas) {
    CostEntry entry;
    entry.omega = omega;
    entry.points = grid.size();
    entry.expansion_seconds = std::numeric_limits<double>::infinity();
    entry.reference_seconds = std::numeric_limits<double>::infinity();
    entry.expansion_memory = expansion.chain_solution().memory_bytes();
    report.entries.push_back(entry);
  }
  // omegas are interleaved within each repeat so load drift hits all of them
  for (int repeat = 0; repeat < std::max(1, options.repeats); ++repeat) {
    for (CostEntry& entry : report.entries) {
      const auto start = Clock::now();
      CVector checksum = CVector::Zero(expansion.problem().dimension());
      for (double t : grid) checksum += evaluate_truncated(expansion, t, entry.omega, s);
      entry.expansion_seconds = std::min(entry.expansion_seconds, seconds_since(start));
      if (!checksum.allFinite()) throw std::runtime_error("non-finite expansion value");
    }
  }
  for (int repeat = 0; repeat < std::max(1, options.repeats); ++repeat) {
    for (CostEntry& entry : report.entries) {
      const auto start = Clock::now();
      const ReferenceTrajectory rk = compute_reference(problem, entry.omega, grid, reference);
      entry.reference_seconds = std::min(entry.reference_seconds, seconds_since(start));
      entry.reference_memory = rk.memory_bytes;
      entry.reference_steps = rk.stats.accepted_steps;
    }
  }
  report.expansion_builds = static_cast<int>(expansion_build_count() - builds_before);
  return report;
}

std::string format_cost_csv(const CostReport& report) {
  std::string out = "omega,method,seconds,memory_bytes,points,steps\n";
  out += fmt::format("0,expansion_build,{:.6g},0,0,0\n", report.build_seconds);
  for (const CostEntry& e : report.entries) {
    out += fmt::format("{:.17g},expansion_eval,{:.6g},{},{},0\n", e.omega, e.expansion_seconds, e.expansion_memory,
                       e.points);
    out += fmt::format("{:.17g},rk_reference,{:.6g},{},{},{}\n", e.omega, e.reference_seconds, e.reference_memory,
                       e.points, e.reference_steps);
  }
  return out;
}

}  // namespace oscillode
