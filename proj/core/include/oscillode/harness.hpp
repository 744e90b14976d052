#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oscillode/problems.hpp"

namespace oscillode {

/// `points` equally spaced times covering [0, t_end] inclusive.
std::vector<double> uniform_grid(double t_end, int points);

struct ReferenceOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Directory for cached RK references; no caching when unset.
  std::optional<std::filesystem::path> cache_dir;
  /// Integrate with RK even when an exact solution is available.
  bool force_rk = false;
};

struct ReferenceTrajectory {
  std::vector<double> grid;
  std::vector<CVector> states;
  std::string provenance;  // "exact" or "rk abs=... rel=..."
  bool from_cache = false;
  SolverStats stats;
  std::size_t memory_bytes = 0;
};

/// Solution of the full oscillatory problem on the grid at one omega.
ReferenceTrajectory compute_reference(const RegisteredProblem& problem, double omega, const std::vector<double>& grid,
                                      const ReferenceOptions& options = {});

struct ErrorStudyOptions {
  std::vector<double> omegas;
  std::vector<int> orders;  // problem defaults when empty
  int grid = 512;
  std::optional<double> t_end;  // problem default when unset
  ReferenceOptions reference;
  ChainOptions chain;
};

/// eps_s(t, omega) = y(t) - truncated expansion of order s, on the grid.
struct ErrorCurve {
  double omega = 0.0;
  int s = 0;
  std::vector<CVector> errors;
  double sup = 0.0;                    // over grid and components
  std::vector<double> component_sup;   // per component
};

struct ErrorReport {
  std::string problem;
  std::vector<double> grid;
  std::vector<ErrorCurve> curves;  // omega-major, then s ascending
  std::vector<std::string> reference_provenance;  // per omega
  int expansion_builds = 0;
};

/// Builds the expansion once at R = max(orders) and compares against the
/// reference for every (omega, s).
ErrorReport run_error_study(const RegisteredProblem& problem, const ErrorStudyOptions& options);

/// Same, reusing an already solved expansion whose span covers the grid.
ErrorReport run_error_study(const RegisteredProblem& problem, const Expansion& expansion,
                            const ErrorStudyOptions& options);

/// Header t,omega,s,component,err_re,err_im; 17 significant digits; rows
/// ordered by omega, s, t, component (1-based).
std::string format_error_csv(const ErrorReport& report);

/// One SVG per (s, omega) plotting the real part of the error of every
/// component against t. Returns the written paths. Throws on an empty report.
std::vector<std::filesystem::path> emit_svg(const ErrorReport& report, const std::filesystem::path& directory);

/// The SVG document for one curve.
std::string render_svg(const ErrorReport& report, const ErrorCurve& curve);

struct SlopeFit {
  int s = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double expected = 0.0;  // -(s + 1)
  bool within = false;
  std::vector<double> omegas;
  std::vector<double> sups;
};

/// Least-squares fit of log sup|eps_s| against log omega for every s present.
std::vector<SlopeFit> fit_slopes(const ErrorReport& report, double tolerance = 0.25);

struct CostEntry {
  double omega = 0.0;
  double expansion_seconds = 0.0;  // grid evaluation of the truncated expansion
  double reference_seconds = 0.0;  // RK integration of the full problem
  std::size_t expansion_memory = 0;
  std::size_t reference_memory = 0;
  std::size_t points = 0;
  long reference_steps = 0;
};

struct CostReport {
  std::string problem;
  int s = 0;
  double build_seconds = 0.0;  // build and chain solve, shared by every omega
  int expansion_builds = 0;
  std::vector<CostEntry> entries;
};

struct CostOptions {
  int grid = 512;
  std::optional<double> t_end;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int repeats = 3;  // both timings keep the fastest run
  ChainOptions chain;
};

CostReport compare_cost(const RegisteredProblem& problem, const std::vector<double>& omegas, int s,
                        const CostOptions& options = {});

/// Header omega,method,seconds,memory_bytes,points,steps.
std::string format_cost_csv(const CostReport& report);

}  // namespace oscillode
