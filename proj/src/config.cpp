#include "cnls/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "cnls/error.hpp"

namespace cnls {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::config, msg); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return key == a; });
    if (!ok) fail(where + ": unknown key \"" + key + "\"");
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + "." + key + ": wrong type");
  }
}

// A scalar or a list of `dim` entries.
template <class T>
std::vector<T> per_axis(const json& v, int dim, const std::string& where) {
  try {
    if (v.is_array()) {
      auto out = v.get<std::vector<T>>();
      if (static_cast<int>(out.size()) != dim) fail(where + ": expected " + std::to_string(dim) + " entries");
      return out;
    }
    return std::vector<T>(dim, v.get<T>());
  } catch (const json::exception&) {
    fail(where + ": wrong type");
  }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

GridPtr parse_grid(const json& j) {
  const std::string w = "grid";
  check_keys(j, w, {"dim", "n", "length"});
  if (!j.contains("dim") || !j.contains("n") || !j.contains("length"))
    fail("grid: dim, n and length are required");
  const int dim = get<int>(j, "dim", w, 1);
  if (dim < 1 || dim > 3) fail("grid.dim: must be 1, 2 or 3");
  return make_grid(dim, per_axis<int>(j.at("n"), dim, "grid.n"),
                   per_axis<double>(j.at("length"), dim, "grid.length"));
}

ProfileSpec parse_profile(const json& j, int dim) {
  const std::string w = "profile";
  check_keys(j, w, {"method", "tol", "max_iter", "path", "n", "length"});
  ProfileSpec p;
  p.method = get<std::string>(j, "method", w, p.method);
  static const std::vector<std::string> methods{"auto", "closed_form", "petviashvili", "file"};
  if (std::find(methods.begin(), methods.end(), p.method) == methods.end())
    fail("profile.method: unknown method \"" + p.method + "\"");
  p.tol = get<double>(j, "tol", w, p.tol);
  p.max_iter = get<int>(j, "max_iter", w, p.max_iter);
  p.path = get<std::string>(j, "path", w, p.path);
  if (p.method == "file" && p.path.empty()) fail("profile.path: required for method file");
  if (p.method == "closed_form" && dim != 1) fail("profile.method: closed_form needs dim 1");
  if (!(p.tol > 0.0) || p.max_iter < 1) fail("profile: tol and max_iter must be positive");
  if (j.contains("n") != j.contains("length")) fail("profile: give both n and length or neither");
  if (j.contains("n")) {
    p.n = per_axis<int>(j.at("n"), dim, "profile.n");
    p.length = per_axis<double>(j.at("length"), dim, "profile.length");
  }
  return p;
}

EvolveSpec parse_evolve(const json& j) {
  const std::string w = "evolve";
  check_keys(j, w, {"dt", "direction", "mu1", "mu2", "beta", "dealias", "record_every",
                    "snapshot_every", "extended_precision", "t_start", "t_end", "initial", "initial_path"});
  EvolveSpec e;
  auto& c = e.cfg;
  c.dt = get<double>(j, "dt", w, c.dt);
  const auto dir = get<std::string>(j, "direction", w, "forward");
  if (dir == "forward") c.direction = Direction::forward;
  else if (dir == "backward") c.direction = Direction::backward;
  else fail("evolve.direction: expected forward or backward");
  c.mu1 = get<double>(j, "mu1", w, c.mu1);
  c.mu2 = get<double>(j, "mu2", w, c.mu2);
  c.beta = get<double>(j, "beta", w, c.beta);
  e.dealias_set = j.contains("dealias");
  c.dealias = get<bool>(j, "dealias", w, c.dealias);
  c.record_every = get<int>(j, "record_every", w, c.record_every);
  c.snapshot_every = get<int>(j, "snapshot_every", w, c.snapshot_every);
  c.extended_precision = get<bool>(j, "extended_precision", w, c.extended_precision);
  e.t_start = get<double>(j, "t_start", w, e.t_start);
  e.t_end = get<double>(j, "t_end", w, e.t_end);
  e.initial = get<std::string>(j, "initial", w, e.initial);
  e.initial_path = get<std::string>(j, "initial_path", w, e.initial_path);
  if (e.initial != "solitons" && e.initial != "zero" && e.initial != "file")
    fail("evolve.initial: expected solitons, zero or file");
  if (e.initial == "file" && e.initial_path.empty())
    fail("evolve.initial_path: required for initial file");
  return e;
}

ExperimentSpec parse_experiment(const json& j) {
  const std::string w = "experiment";
  check_keys(j, w, {"T0", "schedule", "monitors", "floor_control", "seed", "tail", "v_list"});
  ExperimentSpec x;
  x.T0 = get<double>(j, "T0", w, x.T0);
  x.schedule = get<std::vector<double>>(j, "schedule", w, x.schedule);
  x.floor_control = get<bool>(j, "floor_control", w, x.floor_control);
  x.seed = get<std::uint64_t>(j, "seed", w, x.seed);
  x.v_list = get<std::vector<double>>(j, "v_list", w, x.v_list);
  if (j.contains("monitors")) {
    const auto& m = j.at("monitors");
    const std::string wm = "experiment.monitors";
    check_keys(m, wm, {"l2", "action", "interaction", "overlap", "tail", "source"});
    auto& f = x.monitors;
    f.l2 = get<bool>(m, "l2", wm, f.l2);
    f.action = get<bool>(m, "action", wm, f.action);
    f.interaction = get<bool>(m, "interaction", wm, f.interaction);
    f.overlap = get<bool>(m, "overlap", wm, f.overlap);
    f.tail = get<bool>(m, "tail", wm, f.tail);
    f.source = get<bool>(m, "source", wm, f.source);
  }
  if (j.contains("tail")) {
    const auto& t = j.at("tail");
    check_keys(t, "experiment.tail", {"rho", "kappa"});
    if (!t.contains("rho") || !t.contains("kappa")) fail("experiment.tail: rho and kappa required");
    TailWindow tw{get<double>(t, "rho", "experiment.tail", 0.0),
                  get<double>(t, "kappa", "experiment.tail", 0.0)};
    if (!(tw.rho > 0.0 && tw.kappa > 0.0)) fail("experiment.tail: rho and kappa must be positive");
    x.tail = tw;
  }
  return x;
}

SpectrumSpec parse_spectrum(const json& j) {
  const std::string w = "spectrum";
  check_keys(j, w, {"k", "tol", "zero_tol", "trials", "seed", "free", "t"});
  SpectrumSpec s;
  s.k = get<int>(j, "k", w, s.k);
  s.tol = get<double>(j, "tol", w, s.tol);
  s.zero_tol = get<double>(j, "zero_tol", w, s.zero_tol);
  s.trials = get<int>(j, "trials", w, s.trials);
  s.seed = get<std::uint64_t>(j, "seed", w, s.seed);
  s.free = get<bool>(j, "free", w, s.free);
  s.t = get<double>(j, "t", w, s.t);
  if (s.k < 1 || s.trials < 0 || !(s.tol > 0.0) || !(s.zero_tol > 0.0))
    fail("spectrum: k >= 1, trials >= 0 and positive tolerances required");
  return s;
}

OutputSpec parse_output(const json& j) {
  const std::string w = "output";
  check_keys(j, w, {"directory", "formats"});
  OutputSpec o;
  o.directory = get<std::string>(j, "directory", w, o.directory.string());
  o.formats = get<std::vector<std::string>>(j, "formats", w, o.formats);
  for (const auto& f : o.formats)
    if (f != "csv" && f != "json" && f != "bin") fail("output.formats: unknown format \"" + f + "\"");
  return o;
}

RunConfig parse_document(const json& doc) {
  check_keys(doc, "config", {"schema", "grid", "profile", "family", "evolve", "experiment",
                             "spectrum", "output"});
  RunConfig cfg;
  if (!doc.contains("schema")) fail("config: missing \"schema\"");
  cfg.schema = get<int>(doc, "schema", "config", 0);
  if (cfg.schema != kSchemaVersion)
    fail("config.schema: unsupported version " + std::to_string(cfg.schema));
  if (!doc.contains("grid")) fail("config: missing \"grid\" block");
  cfg.grid = parse_grid(doc.at("grid"));
  const int dim = cfg.grid->dim();

  if (doc.contains("profile")) cfg.profile = parse_profile(doc.at("profile"), dim);
  if (doc.contains("evolve")) cfg.evolve = parse_evolve(doc.at("evolve"));
  if (!cfg.evolve.dealias_set) cfg.evolve.cfg.dealias = default_dealias(*cfg.grid);
  if (doc.contains("experiment")) cfg.experiment = parse_experiment(doc.at("experiment"));
  if (doc.contains("spectrum")) cfg.spectrum = parse_spectrum(doc.at("spectrum"));
  if (doc.contains("output")) cfg.output = parse_output(doc.at("output"));

  if (doc.contains("family")) {
    const auto& f = doc.at("family");
    check_keys(f, "family", {"solitons"});
    if (!f.contains("solitons") || !f.at("solitons").is_array() || f.at("solitons").size() != 2)
      fail("family.solitons: expected a list of two solitons");
    std::array<SolitonParams, 2> s{soliton_from_json(f.at("solitons")[0], dim),
                                   soliton_from_json(f.at("solitons")[1], dim)};
    // The family carries the self-interaction coefficients.
    const bool mu1_given = doc.contains("evolve") && doc.at("evolve").contains("mu1");
    const bool mu2_given = doc.contains("evolve") && doc.at("evolve").contains("mu2");
    if ((mu1_given && cfg.evolve.cfg.mu1 != s[0].mu) || (mu2_given && cfg.evolve.cfg.mu2 != s[1].mu))
      fail("evolve.mu1/mu2 disagree with the family");
    cfg.evolve.cfg.mu1 = s[0].mu;
    cfg.evolve.cfg.mu2 = s[1].mu;
    cfg.solitons = s;
  }
  cfg.evolve.cfg.validate();
  return cfg;
}

}  // namespace

bool OutputSpec::wants(std::string_view fmt) const {
  return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

json to_json(const SolitonParams& p) {
  return json{{"omega", p.omega}, {"gamma", p.gamma}, {"x0", p.x0}, {"v", p.v}, {"mu", p.mu}};
}

SolitonParams soliton_from_json(const json& j, int dim) {
  const std::string w = "soliton";
  check_keys(j, w, {"omega", "gamma", "x0", "v", "mu"});
  SolitonParams p;
  p.omega = get<double>(j, "omega", w, p.omega);
  p.gamma = get<double>(j, "gamma", w, p.gamma);
  p.mu = get<double>(j, "mu", w, p.mu);
  p.x0 = j.contains("x0") ? per_axis<double>(j.at("x0"), dim, "soliton.x0")
                          : std::vector<double>(dim, 0.0);
  p.v = j.contains("v") ? per_axis<double>(j.at("v"), dim, "soliton.v")
                        : std::vector<double>(dim, 0.0);
  try {
    p.validate(dim);
  } catch (const Error& e) {
    fail(e.what());
  }
  return p;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "config: JSON syntax error at line " << line << ", column " << col << ": " << e.what();
    fail(os.str());
  }
  try {
    return parse_document(doc);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::precondition) fail(e.what());
    throw;
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::io, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

Profile build_profile(const RunConfig& cfg) {
  const ProfileSpec& p = cfg.profile;
  if (p.method == "file") return read_profile(p.path);
  GridPtr grid = cfg.grid;
  if (p.n) grid = make_grid(cfg.grid->dim(), *p.n, *p.length);
  const bool closed = p.method == "closed_form" || (p.method == "auto" && grid->dim() == 1);
  if (closed) return ground_state_1d(grid);
  PetviashviliOptions opts;
  opts.tol = p.tol;
  opts.max_iter = p.max_iter;
  return petviashvili(grid, opts);
}

SolitonFamily build_family(const RunConfig& cfg, const Profile& profile) {
  if (!cfg.solitons) fail("config: this command needs a \"family\" block");
  return SolitonFamily{*cfg.solitons, {profile, profile}};
}

ConstructionConfig build_construction(const RunConfig& cfg, const SolitonFamily& family,
                                      int jobs) {
  ConstructionConfig c;
  c.family = family;
  c.grid = cfg.grid;
  c.T0 = cfg.experiment.T0;
  c.schedule = cfg.experiment.schedule;
  c.evolve = cfg.evolve.cfg;
  c.monitors = cfg.experiment.monitors;
  c.floor_control = cfg.experiment.floor_control;
  c.tail = cfg.experiment.tail;
  c.seed = cfg.experiment.seed;
  c.jobs = jobs;
  c.validate();
  return c;
}

}  // namespace cnls
