#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cnls/dynamics.hpp"
#include "cnls/grid.hpp"
#include "cnls/solitons.hpp"

namespace cnls {

// ---------------------------------------------------------------------------
// Regression helpers

struct RateFit {
  double rate = 0.0;           // -slope of log(value) against t
  double log_amplitude = 0.0;  // intercept
  double r_squared = 0.0;
  int samples = 0;
  bool poor = false;  // r^2 < 0.9
};

/// Least squares of log(values) on times. Needs >= 5 strictly positive values.
RateFit rate_fit(std::span<const double> times, std::span<const double> values);

// ---------------------------------------------------------------------------
// Monitors

enum class BootstrapFlag { violated, satisfied, improved };
std::string to_string(BootstrapFlag f);

/// improved: err <= bound/2, satisfied: err <= bound, violated otherwise.
BootstrapFlag bootstrap_monitor(double err, double bound);

/// C^1 cubic smoothstep: 0 below 0, 1 above 1, |tau'| <= 3/2.
double smoothstep(double s);

/// 1/2 int (|u1|^2 + |u2|^2) tau((|x| - rho)/kappa), |x| from the box centre.
double tail_mass(const FieldPair& p, double rho, double kappa);

struct InteractionNorms {
  double plain = 0.0;     // || |R1||R2| ||_{L2}
  double gradient = 0.0;  // || (|R1|+|grad R1|)(|R2|+|grad R2|) ||_{L2}
};
InteractionNorms interaction_norms(const FieldPair& solitons);
InteractionNorms interaction_monitor(const SolitonFamily& family, double t, const GridPtr& grid);

struct ResidualNorms {
  double linear = 0.0;
  double nonlinear = 0.0;
  double source = 0.0;
};

/// L2xL2 norms of the linear, nonlinear and source terms of the equation
/// satisfied by eps = u - (R1, R2).
ResidualNorms residual_decomposition(const FieldPair& eps, const FieldPair& solitons, double mu1,
                                     double mu2, double beta);

struct L2Control {
  double norm = 0.0;
  double envelope = 0.0;  // (C / rate) e^{-rate t} with the fitted C
};

/// ||(eps1, eps2)||_{L2xL2} and the envelope for a given fitted constant.
L2Control l2_monitor(const FieldPair& eps, double t, const SolitonFamily& family,
                     double fitted_constant);

/// |S(u) - reference|.
double action_drift_monitor(const FieldPair& u, const SolitonFamily& family, double reference);

// ---------------------------------------------------------------------------
// Construction

struct MonitorFlags {
  bool l2 = true;
  bool action = true;
  bool interaction = true;
  bool overlap = true;
  bool tail = true;
  bool source = true;
};

struct TailWindow {
  double rho = 0.0;
  double kappa = 0.0;
};

struct ConstructionConfig {
  SolitonFamily family;
  GridPtr grid;
  double T0 = 1.0;
  std::vector<double> schedule{4.0, 6.0, 8.0, 10.0};
  EvolveConfig evolve;  // direction is forced to backward
  MonitorFlags monitors;
  bool floor_control = true;
  std::optional<TailWindow> tail;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

/// length >= 2 (max|x_j| + max|v_j| t_max) + 40/sqrt(omega_min) on every axis.
bool box_sizing_ok(const SolitonFamily& family, const Grid& grid, double t_max);
double required_box_length(const SolitonFamily& family, double t_max);

/// Cutoff radius with soliton mass beyond it below delta/4 at time t.
TailWindow default_tail_window(const SolitonFamily& family, const GridPtr& grid, double t,
                               double delta = 1e-4);

struct ReportRow {
  double t = 0.0;
  double err_h1 = 0.0;
  double bound = 0.0;
  double err_l2 = 0.0;
  double action_drift = 0.0;
  double interaction_plain = 0.0;
  double interaction_grad = 0.0;
  double overlap = 0.0;
  double tail_mass = 0.0;
  double source_norm = 0.0;
  BootstrapFlag flag = BootstrapFlag::satisfied;
  // Discretization-floor bookkeeping against the beta = 0 control run.
  double floor_h1 = 0.0;
  BootstrapFlag flag_floored = BootstrapFlag::satisfied;
  double deviation_l2 = 0.0;          // ||u - u_control||_{L2xL2}
  double action_drift_floored = 0.0;  // |S(u) - S(u_control)|
  double linear_norm = 0.0;
  double nonlinear_norm = 0.0;
};

/// Column names of the per-run CSV, in order.
const std::vector<std::string>& report_columns();

struct RunReport {
  double Tn = 0.0;
  std::vector<ReportRow> rows;  // in integration order (decreasing t)
  std::optional<FieldPair> state_T0;
  std::optional<FieldPair> control_T0;
  bool blow_up = false;
  bool bootstrap_ok_raw = true;
  bool bootstrap_ok_floored = true;
  double action_reference = 0.0;
};

struct CauchyResult {
  std::vector<double> differences;            // ||u^n(T0) - u^{n+1}(T0)||_{L2xL2}
  std::vector<double> ratios;                 // differences[i] / differences[i+1]
  std::vector<double> corrected_differences;  // same after removing each run's control
  double geometric_rate = 0.0;                // fitted decay per unit of T^n
  bool shrink_by_10 = false;
};

struct FitSummary {
  std::optional<RateFit> l2;              // on deviation_l2 (floored)
  std::optional<RateFit> action;          // on action_drift_floored
  std::optional<RateFit> l2_raw;          // on err_l2
  std::optional<RateFit> action_raw;      // on action_drift
  double l2_constant = 0.0;               // C in (C/rate) e^{-rate t}
};

struct ConstructionReport {
  double v_star = 0.0;
  double omega_star = 0.0;
  double rate = 0.0;
  TailWindow tail;
  std::vector<RunReport> runs;
  std::vector<FitSummary> fits;  // one per run
  std::optional<CauchyResult> cauchy;
  bool bootstrap_ok_raw = true;
  bool bootstrap_ok_floored = true;
  bool blow_up = false;
};

/// One backward run from T^n to T0 with all enabled monitors.
RunReport run_to_T0(const ConstructionConfig& cfg, double Tn);

ConstructionReport run_construction(const ConstructionConfig& cfg);

/// Fits restricted to rows whose value is at least `window` times the
/// series maximum (the range above the discretization floor).
FitSummary fit_run(const RunReport& run, double rate, double window = 1e-3);

CauchyResult cauchy_check(const std::vector<RunReport>& runs);

/// Log-slope of || |R1||R2| || over [t_begin, t_end] (analytic waves only).
RateFit interaction_slope(const SolitonFamily& family, const GridPtr& grid, double t_begin,
                          double t_end, int samples = 41);

struct ScanEntry {
  double v = 0.0;
  bool pass = false;
  bool non_informative = false;
  bool blow_up = false;
  double min_margin = 0.0;  // min over rows of bound - floored error
};

struct ScanResult {
  std::vector<ScanEntry> entries;
  std::optional<double> onset;  // smallest v above which every entry passes
  bool violations_at_small_end = true;
};

/// Each v sets v1 = v/2, v2 = -v/2 along the first axis.
ScanResult threshold_scan(const ConstructionConfig& base, std::span<const double> v_list);

void write_report_csv(const std::filesystem::path& path, const RunReport& run);

}  // namespace cnls
