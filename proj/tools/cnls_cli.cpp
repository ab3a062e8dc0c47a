// Command-line front end: ground-state, soliton, evolve, construct, spectrum, scan.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cnls/config.hpp"
#include "cnls/error.hpp"
#include "cnls/experiments.hpp"
#include "cnls/field_io.hpp"
#include "cnls/functionals.hpp"
#include "cnls/linops.hpp"
#include "cnls/profiles.hpp"
#include "cnls/solitons.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cnls;

namespace {

enum ExitCode { ok = 0, exit_config = 1, exit_solver = 2, exit_blow_up = 3, exit_io = 4 };

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  bool dry_run = false;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

fs::path output_dir(const RunConfig& cfg, const Options& opt) {
  fs::path dir = opt.out.empty() ? cfg.output.directory : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json metadata(const std::string& command) {
  return {{"command", command}, {"created", timestamp()}, {"schema", kSchemaVersion}};
}

json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"rate", f->rate},
          {"log_amplitude", f->log_amplitude},
          {"r_squared", f->r_squared},
          {"samples", f->samples},
          {"poor", f->poor}};
}

json family_json(const SolitonFamily& fam) {
  return json::array({to_json(fam.params[0]), to_json(fam.params[1])});
}

void print_derived(const RunConfig& cfg, double t_max) {
  std::cout << std::setprecision(10);
  std::cout << "grid: dim " << cfg.grid->dim() << ", points " << cfg.grid->size() << '\n';
  if (!cfg.solitons) {
    std::cout << "family: none\n";
    return;
  }
  SolitonFamily fam{*cfg.solitons, {}};
  std::cout << "v_star: " << fam.v_star() << '\n'
            << "omega_star: " << fam.omega_star() << '\n'
            << "rate: " << fam.rate() << '\n';
  const double need = required_box_length(fam, t_max);
  const bool box = box_sizing_ok(fam, *cfg.grid, t_max);
  std::cout << "box: required length " << need << " up to |t| = " << t_max << ": "
            << (box ? "ok" : "too small") << '\n';
}

Profile zero_profile(const GridPtr& grid) { return Profile{Field(grid), 0.0, ProfileKind::external, 0.0}; }

// ---------------------------------------------------------------------------

int cmd_ground_state(const RunConfig& cfg, const Options& opt) {
  if (opt.dry_run) {
    print_derived(cfg, 0.0);
    return ok;
  }
  const fs::path dir = output_dir(cfg, opt);
  const Profile p = build_profile(cfg);
  write_profile(dir / "profile.bin", p);
  if (p.field.grid().dim() == 1 && cfg.output.wants("csv")) write_field_csv(dir / "profile.csv", p.field);
  std::cout << "profile: " << to_string(p.kind) << ", residual " << p.residual << ", mass "
            << 2.0 * mass(p.field) << '\n';
  return ok;
}

int cmd_soliton(const RunConfig& cfg, const Options& opt) {
  const double t = cfg.evolve.t_start;
  if (opt.dry_run) {
    print_derived(cfg, t);
    return ok;
  }
  const Profile p = build_profile(cfg);
  const SolitonFamily fam = build_family(cfg, p);
  const fs::path dir = output_dir(cfg, opt);
  const FieldPair r = pair_solitons(fam, t, cfg.grid);
  write_field(dir / "soliton_1.bin", r.first);
  write_field(dir / "soliton_2.bin", r.second);
  if (cfg.grid->dim() == 1 && cfg.output.wants("csv")) {
    write_field_csv(dir / "soliton_1.csv", r.first);
    write_field_csv(dir / "soliton_2.csv", r.second);
  }
  json j{{"metadata", metadata("soliton")}, {"t", t}, {"family", family_json(fam)}};
  write_json(dir / "soliton.json", j);
  return ok;
}

int cmd_evolve(const RunConfig& cfg, const Options& opt) {
  const EvolveSpec& es = cfg.evolve;
  if (opt.dry_run) {
    print_derived(cfg, std::max(std::abs(es.t_start), std::abs(es.t_end)));
    return ok;
  }
  std::optional<FieldPair> initial;
  SolitonFamily fam;
  if (es.initial == "solitons") {
    fam = build_family(cfg, build_profile(cfg));
    initial = pair_solitons(fam, es.t_start, cfg.grid);
  } else if (es.initial == "zero") {
    initial.emplace(Field(cfg.grid), Field(cfg.grid));
  } else {
    const fs::path base(es.initial_path);
    initial.emplace(read_field(base.string() + "_1.bin"), read_field(base.string() + "_2.bin"));
    if (!(initial->grid() == *cfg.grid)) throw Error(ErrorKind::config, "initial data grid differs from the config grid");
  }

  const fs::path dir = output_dir(cfg, opt);
  const EvolveConfig& ec = es.cfg;
  const int dim = cfg.grid->dim();
  Monitor monitor = [&](double, const FieldPair& u) {
    const auto s = system_invariants(u, ec.mu1, ec.mu2, ec.beta);
    std::vector<double> row{s.energy1, s.energy2, s.total_energy, s.mass1, s.mass2};
    row.insert(row.end(), s.total_momentum.begin(), s.total_momentum.end());
    row.push_back(s.coupling_overlap);
    return row;
  };
  const Trajectory traj = evolve(*initial, es.t_start, es.t_end, ec, monitor);

  {
    std::ofstream os(dir / "trajectory.csv");
    if (!os) throw Error(ErrorKind::io, "cannot write trajectory.csv");
    os.precision(17);
    os << "t,E1,E2,Etot,M1,M2,Px_tot";
    if (dim > 1) os << ",Py_tot";
    if (dim > 2) os << ",Pz_tot";
    os << ",overlap\n";
    for (std::size_t i = 0; i < traj.monitor_rows.size(); ++i) {
      os << traj.times[i];
      for (double v : traj.monitor_rows[i]) os << ',' << v;
      os << '\n';
    }
  }
  if (cfg.output.wants("bin")) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      std::ostringstream name;
      name << "snapshot_" << std::setw(5) << std::setfill('0') << i;
      write_field(dir / (name.str() + "_1.bin"), traj.snapshots[i].first);
      write_field(dir / (name.str() + "_2.bin"), traj.snapshots[i].second);
    }
    if (traj.final_state) {
      write_field(dir / "final_1.bin", traj.final_state->first);
      write_field(dir / "final_2.bin", traj.final_state->second);
    }
  }
  json j{{"metadata", metadata("evolve")},
         {"t_start", es.t_start},
         {"t_end", es.t_end},
         {"steps_recorded", traj.times.size()},
         {"snapshot_times", traj.snapshot_times},
         {"partial_step", traj.partial_step},
         {"blow_up", traj.blow_up}};
  if (traj.blow_up) j["blow_up_time"] = traj.blow_up_time;
  write_json(dir / "evolve.json", j);
  if (traj.blow_up) {
    std::cerr << "blow-up at t = " << traj.blow_up_time << '\n';
    return exit_blow_up;
  }
  return ok;
}

json construction_json(const ConstructionReport& rep, const ConstructionConfig& cc,
                       const std::vector<std::string>& csvs) {
  json runs = json::array();
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& r = rep.runs[i];
    const auto& f = rep.fits[i];
    runs.push_back({{"Tn", r.Tn},
                    {"csv", csvs.empty() ? json(nullptr) : json(csvs[i])},
                    {"rows", r.rows.size()},
                    {"blow_up", r.blow_up},
                    {"bootstrap_ok_raw", r.bootstrap_ok_raw},
                    {"bootstrap_ok_floored", r.bootstrap_ok_floored},
                    {"action_reference", r.action_reference},
                    {"fit_l2", fit_json(f.l2)},
                    {"fit_action", fit_json(f.action)},
                    {"fit_l2_raw", fit_json(f.l2_raw)},
                    {"fit_action_raw", fit_json(f.action_raw)},
                    {"l2_constant", f.l2_constant}});
  }
  json cauchy = nullptr;
  if (rep.cauchy)
    cauchy = {{"differences", rep.cauchy->differences},
              {"ratios", rep.cauchy->ratios},
              {"corrected_differences", rep.cauchy->corrected_differences},
              {"geometric_rate", rep.cauchy->geometric_rate},
              {"shrink_by_10", rep.cauchy->shrink_by_10}};

  double l2_rate = INFINITY, action_rate = INFINITY;
  bool have_l2 = false, have_action = false;
  for (const auto& f : rep.fits) {
    if (f.l2) { l2_rate = std::min(l2_rate, f.l2->rate); have_l2 = true; }
    if (f.action) { action_rate = std::min(action_rate, f.action->rate); have_action = true; }
  }
  json verdicts{{"bootstrap_raw", rep.bootstrap_ok_raw},
                {"bootstrap_floored", rep.bootstrap_ok_floored},
                {"l2_rate_min", have_l2 ? json(l2_rate) : json(nullptr)},
                {"l2_rate_ok", have_l2 && l2_rate >= 0.9 * rep.rate},
                {"action_rate_min", have_action ? json(action_rate) : json(nullptr)},
                {"action_rate_ok", have_action && action_rate >= 0.85 * 2.0 * rep.rate},
                {"cauchy_shrink_by_10", rep.cauchy ? json(rep.cauchy->shrink_by_10) : json(nullptr)},
                {"blow_up", rep.blow_up}};
  json out{{"family", family_json(cc.family)},
           {"v_star", rep.v_star},
           {"omega_star", rep.omega_star},
           {"rate", rep.rate},
           {"T0", cc.T0},
           {"schedule", cc.schedule},
           {"dt", cc.evolve.dt},
           {"beta", cc.evolve.beta},
           {"tail", {{"rho", rep.tail.rho}, {"kappa", rep.tail.kappa}}},
           {"runs", runs},
           {"cauchy", cauchy},
           {"verdicts", verdicts}};
  if (rep.rate > 0.0) {
    try {
      const auto s = interaction_slope(cc.family, cc.grid, cc.T0, cc.T0 + 2.0);
      out["interaction_slope"] = {{"window", {cc.T0, cc.T0 + 2.0}}, {"slope", -s.rate},
                                  {"r_squared", s.r_squared}};
    } catch (const Error&) {
      out["interaction_slope"] = nullptr;
    }
  }
  return out;
}

std::string tn_tag(double tn) {
  std::ostringstream os;
  os << tn;
  return os.str();
}

int cmd_construct(const RunConfig& cfg, const Options& opt) {
  const auto& sched = cfg.experiment.schedule;
  if (opt.dry_run) {
    print_derived(cfg, sched.empty() ? cfg.experiment.T0 : sched.back());
    return ok;
  }
  const SolitonFamily fam = build_family(cfg, build_profile(cfg));
  const ConstructionConfig cc = build_construction(cfg, fam, opt.jobs);
  const ConstructionReport rep = run_construction(cc);
  const fs::path dir = output_dir(cfg, opt);

  std::vector<std::string> csvs;
  for (const auto& run : rep.runs) {
    const std::string tag = tn_tag(run.Tn);
    if (cfg.output.wants("csv")) {
      csvs.push_back("report_Tn_" + tag + ".csv");
      write_report_csv(dir / csvs.back(), run);
    }
    if (cfg.output.wants("bin") && run.state_T0) {
      write_field(dir / ("state_T0_Tn_" + tag + "_1.bin"), run.state_T0->first);
      write_field(dir / ("state_T0_Tn_" + tag + "_2.bin"), run.state_T0->second);
    }
  }
  json summary = construction_json(rep, cc, csvs);
  summary["metadata"] = metadata("construct");
  write_json(dir / "summary.json", summary);

  std::cout << "rate " << rep.rate << ": bootstrap raw " << (rep.bootstrap_ok_raw ? "ok" : "violated")
            << ", floored " << (rep.bootstrap_ok_floored ? "ok" : "violated") << '\n';
  return rep.blow_up ? exit_blow_up : ok;
}

int cmd_spectrum(const RunConfig& cfg, const Options& opt) {
  if (opt.dry_run) {
    print_derived(cfg, cfg.spectrum.t);
    return ok;
  }
  const SpectrumSpec& s = cfg.spectrum;
  const Profile profile = s.free ? zero_profile(cfg.grid) : build_profile(cfg);
  SpectralReport rep = spectral_report(profile, s.k, s.tol, s.zero_tol);

  SolitonParams params;
  if (cfg.solitons) {
    params = (*cfg.solitons)[0];
  } else {
    params.x0.assign(cfg.grid->dim(), 0.0);
    params.v.assign(cfg.grid->dim(), 0.0);
  }
  CoercivityResult co;
  if (s.trials > 0) {
    co = coercivity_estimate(profile, params, rep, s.t, s.trials, s.seed);
    rep.coercivity_estimate = co.c0;
    rep.coercivity_positive = co.positive;
  }
  const fs::path dir = output_dir(cfg, opt);
  write_spectral_report(dir, "spectrum", rep);
  json j{{"metadata", metadata("spectrum")},
         {"free", s.free},
         {"nu0", rep.nu0},
         {"coercivity", {{"c0", co.c0},
                         {"positive", co.positive},
                         {"trials_used", co.trials_used},
                         {"skipped", co.skipped},
                         {"fresh_checked", co.fresh_checked},
                         {"fresh_violations", co.fresh_violations}}}};
  write_json(dir / "spectrum_summary.json", j);
  std::cout << "nu0 " << rep.nu0 << ", coercivity " << co.c0 << '\n';
  return ok;
}

int cmd_scan(const RunConfig& cfg, const Options& opt) {
  const auto& vl = cfg.experiment.v_list;
  if (vl.empty()) throw Error(ErrorKind::config, "experiment.v_list: required for scan");
  const auto& sched = cfg.experiment.schedule;
  if (opt.dry_run) {
    RunConfig probe = cfg;
    if (probe.solitons) {
      for (int j = 0; j < 2; ++j) {
        auto& v = (*probe.solitons)[j].v;
        v.assign(cfg.grid->dim(), 0.0);
        v[0] = (j == 0 ? 0.5 : -0.5) * vl.back();
      }
    }
    print_derived(probe, sched.empty() ? cfg.experiment.T0 : sched.back());
    return ok;
  }
  const SolitonFamily fam = build_family(cfg, build_profile(cfg));
  ConstructionConfig base;
  base.family = fam;
  base.grid = cfg.grid;
  base.T0 = cfg.experiment.T0;
  base.schedule = sched;
  base.evolve = cfg.evolve.cfg;
  base.monitors = cfg.experiment.monitors;
  base.floor_control = cfg.experiment.floor_control;
  base.tail = cfg.experiment.tail;
  base.seed = cfg.experiment.seed;
  base.jobs = opt.jobs;
  const ScanResult res = threshold_scan(base, vl);

  json entries = json::array();
  bool blow = false;
  for (const auto& e : res.entries) {
    blow = blow || e.blow_up;
    entries.push_back({{"v", e.v},
                       {"v_star", e.v},
                       {"pass", e.pass},
                       {"non_informative", e.non_informative},
                       {"blow_up", e.blow_up},
                       {"min_margin", e.min_margin}});
  }
  json j{{"metadata", metadata("scan")},
         {"entries", entries},
         {"onset", res.onset ? json(*res.onset) : json(nullptr)},
         {"violations_at_small_end", res.violations_at_small_end}};
  write_json(output_dir(cfg, opt) / "scan_summary.json", j);
  return blow ? exit_blow_up : ok;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::precondition: return exit_config;
    case ErrorKind::solver: return exit_solver;
    case ErrorKind::blow_up: return exit_blow_up;
    case ErrorKind::io: return exit_io;
  }
  return exit_config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulation lab for coupled cubic NLS solitary waves"};
  app.require_subcommand(1);
  Options opt;

  using Handler = int (*)(const RunConfig&, const Options&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"ground-state", "compute the stationary profile", cmd_ground_state},
      {"soliton", "sample the two solitary waves", cmd_soliton},
      {"evolve", "integrate the coupled system", cmd_evolve},
      {"construct", "backward construction with monitors", cmd_construct},
      {"spectrum", "linearized spectra and coercivity", cmd_spectrum},
      {"scan", "velocity threshold scan", cmd_scan}};

  Handler chosen = nullptr;
  std::string chosen_name;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON run configuration")->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.directory)");
    sub->add_option("--jobs", opt.jobs, "worker cap")->check(CLI::PositiveNumber);
    sub->add_flag("--dry-run", opt.dry_run, "validate and print derived quantities");
    sub->callback([&chosen, &chosen_name, fn = fn, name = name] {
      chosen = fn;
      chosen_name = name;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : exit_config;
  }

  try {
    const RunConfig cfg = load_config(opt.config);
    return chosen(cfg, opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver;
  }
}
