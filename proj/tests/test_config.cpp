#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "cnls/config.hpp"
#include "cnls/error.hpp"

using namespace cnls;

namespace {

const char* kValid = R"({
  "schema": 1,
  "grid": {"dim": 1, "n": 1024, "length": 128},
  "family": {"solitons": [
    {"omega": 1.0, "gamma": 0.5, "x0": [-10.0], "v": [2.0], "mu": 1.0},
    {"omega": 2.0, "x0": [10.0], "v": [-2.0], "mu": 0.5}
  ]},
  "evolve": {"dt": 0.002, "beta": 0.5, "record_every": 5, "t_end": 3.0},
  "experiment": {"T0": 1.0, "schedule": [2, 3], "monitors": {"tail": false}, "tail": {"rho": 20, "kappa": 4}},
  "spectrum": {"k": 4, "trials": 20},
  "output": {"directory": "somewhere", "formats": ["csv"]}
})";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for: " << text);
  return ErrorKind::solver;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("a full document parses") {
  const RunConfig c = parse_config(kValid);
  CHECK(c.schema == 1);
  CHECK(c.grid->dim() == 1);
  CHECK(c.grid->points(0) == 1024);
  CHECK(c.grid->length(0) == 128.0);
  REQUIRE(c.solitons);
  CHECK((*c.solitons)[0].gamma == 0.5);
  CHECK((*c.solitons)[1].omega == 2.0);
  CHECK((*c.solitons)[1].x0[0] == 10.0);
  CHECK(c.evolve.cfg.dt == 0.002);
  CHECK(c.evolve.cfg.beta == 0.5);
  CHECK(c.evolve.cfg.record_every == 5);
  CHECK(c.evolve.t_end == 3.0);
  // The family carries mu.
  CHECK(c.evolve.cfg.mu1 == 1.0);
  CHECK(c.evolve.cfg.mu2 == 0.5);
  // Dealiasing follows the default policy when unset.
  CHECK(c.evolve.cfg.dealias == default_dealias(*c.grid));
  CHECK(c.experiment.schedule == std::vector<double>{2.0, 3.0});
  CHECK_FALSE(c.experiment.monitors.tail);
  CHECK(c.experiment.monitors.l2);
  REQUIRE(c.experiment.tail);
  CHECK(c.experiment.tail->kappa == 4.0);
  CHECK(c.spectrum.k == 4);
  CHECK(c.spectrum.trials == 20);
  CHECK(c.spectrum.zero_tol == 1e-6);
  CHECK(c.output.directory == "somewhere");
  CHECK(c.output.wants("csv"));
  CHECK_FALSE(c.output.wants("bin"));
}

TEST_CASE("defaults of a minimal document") {
  const RunConfig c = parse_config(R"({"schema": 1, "grid": {"dim": 2, "n": 64, "length": 20}})");
  CHECK(c.grid->dim() == 2);
  CHECK(c.grid->points(1) == 64);
  CHECK_FALSE(c.solitons);
  CHECK(c.evolve.cfg.dealias);
  CHECK(c.experiment.T0 == 1.0);
  CHECK(c.experiment.schedule == std::vector<double>{4, 6, 8, 10});
  CHECK(c.output.wants("bin"));
  CHECK(c.profile.method == "auto");
  CHECK_FALSE(c.evolve.cfg.extended_precision);
  CHECK(parse_config(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20},
                         "evolve": {"extended_precision": true}})")
            .evolve.cfg.extended_precision);
  CHECK_THROWS_AS(build_family(c, Profile{}), Error);
}

TEST_CASE("rejected documents") {
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "extra": 1})") == ErrorKind::config);
  CHECK(message_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20, "spacing": 1}})").find("spacing") !=
        std::string::npos);
  CHECK(kind_of(R"({"schema": 2, "grid": {"dim": 1, "n": 64, "length": 20}})") == ErrorKind::config);
  CHECK(kind_of(R"({"grid": {"dim": 1, "n": 64, "length": 20}})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 100, "length": 20}})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "evolve": {"dt": -1}})") ==
        ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "evolve": {"dt": "small"}})") ==
        ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "evolve": {"direction": "up"}})") ==
        ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "output": {"formats": ["png"]}})") ==
        ErrorKind::config);
  // Family: wrong count, bad omega, mu disagreeing with evolve.
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20},
                    "family": {"solitons": [{"omega": 1}]}})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20},
                    "family": {"solitons": [{"omega": -1}, {"omega": 1}]}})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20}, "evolve": {"mu1": 2},
                    "family": {"solitons": [{"omega": 1, "mu": 1}, {"omega": 1}]}})") == ErrorKind::config);
  CHECK(kind_of(R"({"schema": 1, "grid": {"dim": 1, "n": 64, "length": 20},
                    "family": {"solitons": [{"omega": 1, "x0": [1, 2]}, {"omega": 1}]}})") == ErrorKind::config);
}

TEST_CASE("syntax errors report line and column") {
  const std::string text = "{\n  \"schema\": 1,\n  \"grid\": {\"dim\": 1,, \"n\": 64}\n}";
  CHECK(kind_of(text) == ErrorKind::config);
  const std::string msg = message_of(text);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column 21") != std::string::npos);
}

TEST_CASE("soliton JSON round trip") {
  SolitonParams p;
  p.omega = 1.7;
  p.gamma = -0.3;
  p.x0 = {1.0, -2.0};
  p.v = {0.5, 4.0};
  p.mu = 0.9;
  const SolitonParams q = soliton_from_json(to_json(p), 2);
  CHECK(q.omega == p.omega);
  CHECK(q.gamma == p.gamma);
  CHECK(q.x0 == p.x0);
  CHECK(q.v == p.v);
  CHECK(q.mu == p.mu);
  // Scalars broadcast over the axes.
  const auto s = soliton_from_json(nlohmann::json{{"omega", 1.0}, {"v", 3.0}}, 3);
  CHECK(s.v == std::vector<double>{3.0, 3.0, 3.0});
  CHECK(s.x0 == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("files and builders") {
  CHECK(std::filesystem::exists(CNLS_CONFIG_DIR "/centerpiece.json"));
  const RunConfig c = load_config(CNLS_CONFIG_DIR "/centerpiece.json");
  CHECK(c.grid->points(0) == 4096);
  CHECK_FALSE(c.evolve.cfg.dealias);
  try {
    load_config("/nonexistent/cnls.json");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }

  const RunConfig small = parse_config(kValid);
  const Profile phi = build_profile(small);
  CHECK(phi.kind == ProfileKind::closed_form_1d);
  const SolitonFamily fam = build_family(small, phi);
  const ConstructionConfig cc = build_construction(small, fam, 2);
  CHECK(cc.jobs == 2);
  CHECK(cc.schedule == std::vector<double>{2.0, 3.0});
  CHECK(cc.evolve.beta == 0.5);
  CHECK_NOTHROW(cc.validate());
}
