#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cnls/dynamics.hpp"
#include "cnls/experiments.hpp"
#include "cnls/grid.hpp"
#include "cnls/profiles.hpp"
#include "cnls/solitons.hpp"

namespace cnls {

inline constexpr int kSchemaVersion = 1;

struct ProfileSpec {
  /// auto: closed form in 1D, Petviashvili otherwise. Also closed_form,
  /// petviashvili, file.
  std::string method = "auto";
  double tol = 1e-12;
  int max_iter = 500;
  std::string path;
  /// Optional dedicated profile grid; defaults to the run grid.
  std::optional<std::vector<int>> n;
  std::optional<std::vector<double>> length;
};

struct EvolveSpec {
  EvolveConfig cfg;
  double t_start = 0.0;
  double t_end = 0.0;
  std::string initial = "solitons";  // solitons | zero | file
  std::string initial_path;
  bool dealias_set = false;
};

struct ExperimentSpec {
  double T0 = 1.0;
  std::vector<double> schedule{4.0, 6.0, 8.0, 10.0};
  MonitorFlags monitors;
  bool floor_control = true;
  std::uint64_t seed = 0;
  std::optional<TailWindow> tail;
  std::vector<double> v_list;
};

struct SpectrumSpec {
  int k = 6;
  double tol = 1e-8;
  double zero_tol = 1e-6;
  int trials = 200;
  std::uint64_t seed = 1;
  bool free = false;  // spectra of -Lap + 1 instead of the linearized operators
  double t = 0.0;
};

struct OutputSpec {
  std::filesystem::path directory = "out";
  std::vector<std::string> formats{"csv", "json", "bin"};
  bool wants(std::string_view fmt) const;
};

struct RunConfig {
  int schema = kSchemaVersion;
  GridPtr grid;
  ProfileSpec profile;
  std::optional<std::array<SolitonParams, 2>> solitons;
  EvolveSpec evolve;
  ExperimentSpec experiment;
  SpectrumSpec spectrum;
  OutputSpec output;
};

/// Parses and validates a config document. Malformed JSON, unknown keys and
/// out-of-range values raise ErrorKind::config; syntax errors carry line and
/// column.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SolitonParams& p);
SolitonParams soliton_from_json(const nlohmann::json& j, int dim);

/// Profile per ProfileSpec (may run Petviashvili).
Profile build_profile(const RunConfig& cfg);
SolitonFamily build_family(const RunConfig& cfg, const Profile& profile);
ConstructionConfig build_construction(const RunConfig& cfg, const SolitonFamily& family,
                                      int jobs);

}  // namespace cnls
