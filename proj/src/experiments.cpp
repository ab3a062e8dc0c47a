#include "cnls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "cnls/error.hpp"
#include "cnls/functionals.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pair_l2(const FieldPair& p) { return pair_norm(p, PairNorm::l2); }

double min_omega(const SolitonFamily& f) {
  return std::min(f.params[0].omega, f.params[1].omega);
}

// Pointwise |grad f|.
std::vector<double> gradient_modulus(const Field& f) {
  const auto grad = spectral_gradient(f);
  std::vector<double> out(f.size(), 0.0);
  for (const auto& d : grad)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::norm(d[i]);
  for (double& x : out) x = std::sqrt(x);
  return out;
}

double l2_of(const Grid& g, const std::vector<double>& density_sqrt) {
  std::vector<double> sq(density_sqrt.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = density_sqrt[i] * density_sqrt[i];
  return std::sqrt(integrate(g, sq));
}

// Radial distance from the box centre.
double radius(const Grid& g, std::size_t flat) {
  const auto x = g.point(flat);
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) r2 += x[a] * x[a];
  return std::sqrt(r2);
}

}  // namespace

// ---------------------------------------------------------------------------

RateFit rate_fit(std::span<const double> times, std::span<const double> values) {
  require(times.size() == values.size(), "rate_fit: times and values differ in length");
  require(values.size() >= 5, "rate_fit: at least 5 samples are required");
  for (double v : values)
    require(std::isfinite(v) && v > 0.0, "rate_fit: values must be positive");

  const double n = static_cast<double>(values.size());
  double mt = 0.0, my = 0.0;
  std::vector<double> y(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    y[i] = std::log(values[i]);
    mt += times[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    stt += (times[i] - mt) * (times[i] - mt);
    sty += (times[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(stt > 0.0, "rate_fit: times must not all coincide");

  RateFit fit;
  const double slope = sty / stt;
  fit.rate = -slope;
  fit.log_amplitude = my - slope * mt;
  fit.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  fit.samples = static_cast<int>(values.size());
  fit.poor = fit.r_squared < 0.9;
  return fit;
}

// ---------------------------------------------------------------------------

std::string to_string(BootstrapFlag f) {
  switch (f) {
    case BootstrapFlag::violated: return "violated";
    case BootstrapFlag::satisfied: return "satisfied";
    case BootstrapFlag::improved: return "improved";
  }
  return "violated";
}

BootstrapFlag bootstrap_monitor(double err, double bound) {
  if (!(err <= bound)) return BootstrapFlag::violated;
  return err <= 0.5 * bound ? BootstrapFlag::improved : BootstrapFlag::satisfied;
}

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

double tail_mass(const FieldPair& p, double rho, double kappa) {
  require(rho > 0.0 && kappa > 0.0, "tail_mass: rho and kappa must be positive");
  const Grid& g = p.grid();
  double half = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) half = std::min(half, 0.5 * g.length(a));
  require(rho + kappa <= half, "tail_mass: cutoff wraps around the periodic box");

  std::vector<double> density(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = smoothstep((radius(g, i) - rho) / kappa);
    density[i] = w * (std::norm(p.first[i]) + std::norm(p.second[i]));
  }
  return 0.5 * integrate(g, density);
}

InteractionNorms interaction_norms(const FieldPair& r) {
  const Grid& g = r.grid();
  const auto g1 = gradient_modulus(r.first);
  const auto g2 = gradient_modulus(r.second);
  std::vector<double> plain(g.size()), grad(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a1 = std::abs(r.first[i]);
    const double a2 = std::abs(r.second[i]);
    plain[i] = a1 * a2;
    grad[i] = (a1 + g1[i]) * (a2 + g2[i]);
  }
  return {l2_of(g, plain), l2_of(g, grad)};
}

InteractionNorms interaction_monitor(const SolitonFamily& family, double t, const GridPtr& grid) {
  return interaction_norms(pair_solitons(family, t, grid));
}

ResidualNorms residual_decomposition(const FieldPair& eps, const FieldPair& r, double mu1,
                                     double mu2, double beta) {
  require(eps.same_grid(r), "residual_decomposition: grids differ");
  const GridPtr grid = eps.first.grid_ptr();
  const std::size_t n = grid->size();

  auto component = [&](const Field& e, const Field& R, const Field& e_o, const Field& R_o,
                       double mu, Field& lin, Field& nl, Field& src) {
    const Field lap = laplacian(e);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx E = e[i], Rv = R[i], Eo = e_o[i], Ro = R_o[i];
      const double rr = std::norm(Rv), ro = std::norm(Ro);
      const double cross = 2.0 * std::real(std::conj(Ro) * Eo);
      lin[i] = lap[i] + mu * (2.0 * rr * E + Rv * Rv * std::conj(E)) + beta * ro * E +
               beta * cross * Rv;
      const double ee = std::norm(E), eo = std::norm(Eo);
      nl[i] = mu * (2.0 * Rv * ee + std::conj(Rv) * E * E + ee * E) +
              beta * (eo * Rv + cross * E + eo * E);
      src[i] = beta * ro * Rv;
    }
  };

  Field l1(grid), l2(grid), n1(grid), n2(grid), s1(grid), s2(grid);
  component(eps.first, r.first, eps.second, r.second, mu1, l1, n1, s1);
  component(eps.second, r.second, eps.first, r.first, mu2, l2, n2, s2);
  auto pn = [](const Field& a, const Field& b) { return std::hypot(norm_l2(a), norm_l2(b)); };
  return {pn(l1, l2), pn(n1, n2), pn(s1, s2)};
}

L2Control l2_monitor(const FieldPair& eps, double t, const SolitonFamily& family,
                     double fitted_constant) {
  L2Control out;
  out.norm = pair_l2(eps);
  const double rate = family.rate();
  out.envelope = rate > 0.0 ? fitted_constant / rate * std::exp(-rate * t) : kNaN;
  return out;
}

double action_drift_monitor(const FieldPair& u, const SolitonFamily& family, double reference) {
  return std::abs(vector_action(u, family) - reference);
}

// ---------------------------------------------------------------------------

double required_box_length(const SolitonFamily& family, double t_max) {
  double xmax = 0.0, vmax = 0.0;
  for (const auto& p : family.params) {
    for (double x : p.x0) xmax = std::max(xmax, std::abs(x));
    double v2 = 0.0;
    for (double v : p.v) v2 += v * v;
    vmax = std::max(vmax, std::sqrt(v2));
  }
  return 2.0 * (xmax + vmax * std::abs(t_max)) + 40.0 / std::sqrt(min_omega(family));
}

bool box_sizing_ok(const SolitonFamily& family, const Grid& grid, double t_max) {
  const double need = required_box_length(family, t_max);
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.length(a) < need) return false;
  return true;
}

TailWindow default_tail_window(const SolitonFamily& family, const GridPtr& grid, double t,
                               double delta) {
  const FieldPair r = pair_solitons(family, t, grid);
  const Grid& g = *grid;
  double half = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) half = std::min(half, 0.5 * g.length(a));

  // Mass outside radius rho, as a function of the grid radii.
  std::vector<std::pair<double, double>> shells(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    shells[i] = {radius(g, i),
                 0.5 * (std::norm(r.first[i]) + std::norm(r.second[i])) * g.cell_volume()};
  std::sort(shells.begin(), shells.end());
  double outside = 0.0;
  double rho = shells.back().first;
  for (auto it = shells.rbegin(); it != shells.rend(); ++it) {
    if (outside + it->second > 0.25 * delta) break;
    outside += it->second;
    rho = it->first;
  }
  const double kappa = std::min(5.0, half - rho);
  require(rho > 0.0 && kappa > 0.0, "default_tail_window: box too small for the cutoff",
          ErrorKind::config);
  return {rho, kappa};
}

void ConstructionConfig::validate() const {
  require(grid != nullptr, "construction: grid missing", ErrorKind::config);
  for (const auto& p : family.params) p.validate(grid->dim());
  require(std::isfinite(T0), "construction: T0 must be finite", ErrorKind::config);
  require(!schedule.empty(), "construction: empty schedule", ErrorKind::config);
  require(T0 <= schedule.front(), "construction: T0 exceeds the first final time",
          ErrorKind::config);
  for (std::size_t i = 1; i < schedule.size(); ++i)
    require(schedule[i] > schedule[i - 1], "construction: schedule must be strictly increasing",
            ErrorKind::config);
  require(jobs >= 1, "construction: jobs must be >= 1", ErrorKind::config);
  evolve.validate();
  double tmax = std::max(std::abs(T0), std::abs(schedule.back()));
  require(box_sizing_ok(family, *grid, tmax),
          "construction: box shorter than " + std::to_string(required_box_length(family, tmax)),
          ErrorKind::config);
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "t",           "err_H1",         "bound",          "err_L2",
      "action_drift", "interaction_plain", "interaction_grad", "overlap",
      "tail_mass",   "source_norm",    "bootstrap_flag", "floor_H1",
      "err_H1_floored", "bootstrap_flag_floored", "deviation_L2", "action_drift_floored",
      "linear_norm", "nonlinear_norm"};
  return cols;
}

RunReport run_to_T0(const ConstructionConfig& cfg, double Tn) {
  cfg.validate();
  const SolitonFamily& fam = cfg.family;
  const GridPtr grid = cfg.grid;
  const SolitonPair waves(fam, grid);
  const TailWindow tail = cfg.tail ? *cfg.tail : default_tail_window(fam, grid, cfg.T0);

  EvolveConfig ec = cfg.evolve;
  ec.direction = Direction::backward;
  ec.snapshot_every = 0;
  EvolveConfig ec0 = ec;
  ec0.beta = 0.0;
  ec0.record_every = std::numeric_limits<int>::max();

  const FieldPair final_data = waves.at(Tn);
  RunReport run;
  run.Tn = Tn;
  run.action_reference = vector_action(final_data, fam);

  // The control run is advanced in lockstep between records so that both
  // trajectories see exactly the same step sequence.
  FieldPair control = final_data;
  double t_prev = Tn;
  const bool use_control = cfg.floor_control;
  const MonitorFlags& on = cfg.monitors;
  const double rate = fam.rate();

  Monitor monitor = [&](double t, const FieldPair& u) -> std::vector<double> {
    if (use_control && t != t_prev) {
      Trajectory c = evolve(control, t_prev, t, ec0);
      require(!c.blow_up, "control run blew up", ErrorKind::blow_up);
      control = std::move(*c.final_state);
    }
    t_prev = t;

    const FieldPair R = waves.at(t);
    const FieldPair eps = u - R;
    ReportRow row;
    row.t = t;
    row.err_h1 = pair_norm(eps, PairNorm::h1);
    row.bound = std::exp(-rate * t);
    row.err_l2 = on.l2 ? pair_l2(eps) : kNaN;
    const double s_u = on.action ? vector_action(u, fam) : kNaN;
    row.action_drift = on.action ? std::abs(s_u - run.action_reference) : kNaN;
    if (on.interaction) {
      const auto in = interaction_norms(R);
      row.interaction_plain = in.plain;
      row.interaction_grad = in.gradient;
    } else {
      row.interaction_plain = row.interaction_grad = kNaN;
    }
    row.overlap = on.overlap ? coupling_overlap(u) : kNaN;
    row.tail_mass = on.tail ? tail_mass(u, tail.rho, tail.kappa) : kNaN;
    if (on.source) {
      const auto rd = residual_decomposition(eps, R, ec.mu1, ec.mu2, ec.beta);
      row.source_norm = rd.source;
      row.linear_norm = rd.linear;
      row.nonlinear_norm = rd.nonlinear;
    } else {
      row.source_norm = row.linear_norm = row.nonlinear_norm = kNaN;
    }
    row.flag = bootstrap_monitor(row.err_h1, row.bound);

    if (use_control) {
      row.floor_h1 = pair_norm(control - R, PairNorm::h1);
      row.deviation_l2 = pair_l2(u - control);
      row.action_drift_floored =
          on.action ? std::abs(s_u - vector_action(control, fam)) : kNaN;
    } else {
      row.floor_h1 = 0.0;
      row.deviation_l2 = row.err_l2;
      row.action_drift_floored = row.action_drift;
    }
    row.flag_floored =
        bootstrap_monitor(std::max(0.0, row.err_h1 - 2.0 * row.floor_h1), row.bound);
    run.rows.push_back(row);
    return {};
  };

  Trajectory traj = evolve(final_data, Tn, cfg.T0, ec, monitor);
  run.blow_up = traj.blow_up;
  if (traj.final_state) run.state_T0 = std::move(traj.final_state);
  if (use_control && !traj.blow_up) run.control_T0 = control;
  for (const auto& r : run.rows) {
    run.bootstrap_ok_raw = run.bootstrap_ok_raw && r.flag != BootstrapFlag::violated;
    run.bootstrap_ok_floored =
        run.bootstrap_ok_floored && r.flag_floored != BootstrapFlag::violated;
  }
  if (run.blow_up) run.bootstrap_ok_raw = run.bootstrap_ok_floored = false;
  return run;
}

namespace {

std::optional<RateFit> windowed_fit(const std::vector<ReportRow>& rows, double ReportRow::*col,
                                    double window) {
  double peak = 0.0;
  for (const auto& r : rows)
    if (std::isfinite(r.*col)) peak = std::max(peak, r.*col);
  if (!(peak > 0.0)) return std::nullopt;
  std::vector<double> t, v;
  for (const auto& r : rows) {
    const double x = r.*col;
    if (std::isfinite(x) && x > 0.0 && x >= window * peak) {
      t.push_back(r.t);
      v.push_back(x);
    }
  }
  if (v.size() < 5) return std::nullopt;
  return rate_fit(t, v);
}

}  // namespace

FitSummary fit_run(const RunReport& run, double rate, double window) {
  FitSummary s;
  s.l2 = windowed_fit(run.rows, &ReportRow::deviation_l2, window);
  s.action = windowed_fit(run.rows, &ReportRow::action_drift_floored, window);
  s.l2_raw = windowed_fit(run.rows, &ReportRow::err_l2, window);
  s.action_raw = windowed_fit(run.rows, &ReportRow::action_drift, window);

  // C from log(err e^{rate t}) averaged over the fitted window.
  if (s.l2 && rate > 0.0) {
    double peak = 0.0;
    for (const auto& r : run.rows) peak = std::max(peak, r.deviation_l2);
    double acc = 0.0;
    int cnt = 0;
    for (const auto& r : run.rows)
      if (r.deviation_l2 > 0.0 && r.deviation_l2 >= window * peak) {
        acc += std::log(r.deviation_l2) + rate * r.t;
        ++cnt;
      }
    s.l2_constant = rate * std::exp(acc / cnt);
  }
  return s;
}

CauchyResult cauchy_check(const std::vector<RunReport>& runs) {
  require(runs.size() >= 2, "cauchy_check: at least two runs are required");
  CauchyResult c;
  for (const auto& r : runs)
    require(r.state_T0.has_value(), "cauchy_check: a run has no final state",
            ErrorKind::blow_up);
  const bool corrected = std::all_of(runs.begin(), runs.end(),
                                     [](const RunReport& r) { return r.control_T0.has_value(); });
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const FieldPair& a = *runs[i].state_T0;
    const FieldPair& b = *runs[i + 1].state_T0;
    c.differences.push_back(pair_l2(a - b));
    if (corrected)
      c.corrected_differences.push_back(
          pair_l2((a - *runs[i].control_T0) - (b - *runs[i + 1].control_T0)));
  }
  for (std::size_t i = 0; i + 1 < c.differences.size(); ++i) {
    const double next = c.differences[i + 1];
    c.ratios.push_back(next > 0.0 ? c.differences[i] / next
                                  : std::numeric_limits<double>::infinity());
  }
  c.shrink_by_10 = !c.ratios.empty() && std::all_of(c.ratios.begin(), c.ratios.end(),
                                                    [](double r) { return r >= 10.0; });

  // Geometric decay per unit of T^n, by least squares on log differences.
  const bool positive = std::all_of(c.differences.begin(), c.differences.end(),
                                    [](double d) { return d > 0.0; });
  if (positive && c.differences.size() >= 2) {
    const std::size_t m = c.differences.size();
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mt += runs[i].Tn;
      my += std::log(c.differences[i]);
    }
    mt /= m;
    my /= m;
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      stt += (runs[i].Tn - mt) * (runs[i].Tn - mt);
      sty += (runs[i].Tn - mt) * (std::log(c.differences[i]) - my);
    }
    c.geometric_rate = stt > 0.0 ? -sty / stt : 0.0;
  }
  return c;
}

ConstructionReport run_construction(const ConstructionConfig& cfg_in) {
  cfg_in.validate();
  ConstructionConfig cfg = cfg_in;
  if (!cfg.tail) cfg.tail = default_tail_window(cfg.family, cfg.grid, cfg.T0);

  ConstructionReport rep;
  rep.v_star = cfg.family.v_star();
  rep.omega_star = cfg.family.omega_star();
  rep.rate = cfg.family.rate();
  rep.tail = *cfg.tail;

  const std::size_t n = cfg.schedule.size();
  rep.runs.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rep.runs[i] = run_to_T0(cfg, cfg.schedule[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(cfg.jobs, static_cast<int>(n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& run : rep.runs) {
    rep.fits.push_back(fit_run(run, rep.rate));
    rep.bootstrap_ok_raw = rep.bootstrap_ok_raw && run.bootstrap_ok_raw;
    rep.bootstrap_ok_floored = rep.bootstrap_ok_floored && run.bootstrap_ok_floored;
    rep.blow_up = rep.blow_up || run.blow_up;
  }
  if (n >= 2 && !rep.blow_up) rep.cauchy = cauchy_check(rep.runs);
  return rep;
}

RateFit interaction_slope(const SolitonFamily& family, const GridPtr& grid, double t_begin,
                          double t_end, int samples) {
  require(samples >= 5 && t_end > t_begin, "interaction_slope: bad sampling window");
  std::vector<double> t(samples), v(samples);
  for (int i = 0; i < samples; ++i) {
    t[i] = t_begin + (t_end - t_begin) * i / (samples - 1);
    v[i] = interaction_monitor(family, t[i], grid).plain;
  }
  return rate_fit(t, v);
}

ScanResult threshold_scan(const ConstructionConfig& base, std::span<const double> v_list) {
  require(!v_list.empty(), "threshold_scan: empty velocity list", ErrorKind::config);
  for (std::size_t i = 0; i < v_list.size(); ++i) {
    require(v_list[i] >= 0.0, "threshold_scan: velocities must be non-negative",
            ErrorKind::config);
    require(i == 0 || v_list[i] > v_list[i - 1], "threshold_scan: velocities must ascend",
            ErrorKind::config);
  }

  ScanResult out;
  for (double v : v_list) {
    ConstructionConfig cfg = base;
    const int dim = cfg.grid->dim();
    for (int j = 0; j < 2; ++j) {
      cfg.family.params[j].v.assign(dim, 0.0);
      cfg.family.params[j].v[0] = j == 0 ? 0.5 * v : -0.5 * v;
    }
    ScanEntry e;
    e.v = v;
    e.non_informative = v == 0.0;
    const ConstructionReport rep = run_construction(cfg);
    e.blow_up = rep.blow_up;
    e.pass = rep.bootstrap_ok_floored && !rep.blow_up;
    e.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& run : rep.runs)
      for (const auto& r : run.rows)
        e.min_margin = std::min(e.min_margin, r.bound - std::max(0.0, r.err_h1 - 2.0 * r.floor_h1));
    out.entries.push_back(e);
  }

  // Onset: smallest v from which every remaining entry passes.
  for (std::size_t i = out.entries.size(); i-- > 0;) {
    if (!out.entries[i].pass) break;
    out.onset = out.entries[i].v;
  }
  bool seen_pass = false;
  for (const auto& e : out.entries) {
    if (e.pass) seen_pass = true;
    else if (seen_pass) out.violations_at_small_end = false;
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path, const RunReport& run) {
  std::ofstream os(path);
  require(static_cast<bool>(os), "cannot open " + path.string(), ErrorKind::io);
  os.precision(17);
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (auto it = run.rows.rbegin(); it != run.rows.rend(); ++it) {
    const ReportRow& r = *it;
    os << r.t << ',' << r.err_h1 << ',' << r.bound << ',' << r.err_l2 << ',' << r.action_drift
       << ',' << r.interaction_plain << ',' << r.interaction_grad << ',' << r.overlap << ','
       << r.tail_mass << ',' << r.source_norm << ',' << to_string(r.flag) << ',' << r.floor_h1
       << ',' << std::max(0.0, r.err_h1 - 2.0 * r.floor_h1) << ',' << to_string(r.flag_floored)
       << ',' << r.deviation_l2 << ',' << r.action_drift_floored << ',' << r.linear_norm << ','
       << r.nonlinear_norm << '\n';
  }
  require(static_cast<bool>(os), "write failed: " + path.string(), ErrorKind::io);
}

}  // namespace cnls
