#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cnls/grid.hpp"

namespace cnls {

enum class ProfileKind { closed_form_1d, petviashvili, external };

std::string to_string(ProfileKind kind);
ProfileKind profile_kind_from_string(const std::string& s);

/// A sampled solution of  -Lap(Phi) + Phi - |Phi|^2 Phi = 0  centred at the
/// box origin, with its sup-norm residual.
struct Profile {
  Field field;
  double residual = 0.0;
  ProfileKind kind = ProfileKind::external;
  double tolerance = 0.0;  // solver tolerance the profile was produced with
};

/// Tail amplitude (relative to the peak) above which a box counts as too
/// small for a profile.
inline constexpr double kTailTolerance = 1e-10;

/// sqrt(2) sech(x) sampled on a 1D grid.
Profile ground_state_1d(const GridPtr& grid);

struct PetviashviliOptions {
  double tol = 1e-12;
  int max_iter = 500;
  double gamma_exponent = 1.5;
  /// Overrides the default seed 2*exp(-|x|^2).
  std::optional<Field> initial_guess;
};

/// Normalized fixed-point iteration for the ground state. When `trace` is
/// given it receives the sup distance between successive iterates.
Profile petviashvili(const GridPtr& grid, const PetviashviliOptions& opts,
                     std::vector<double>* trace = nullptr);

/// sup |-Lap(Phi) + Phi - |Phi|^2 Phi|.
double residual(const Field& phi);
inline double residual(const Profile& p) { return residual(p.field); }

/// Smallest C with |Phi(x)| + |grad Phi(x)| <= C exp(-eta |x|) on the grid.
double decay_constant(const Profile& p, double eta);

/// Binary container plus "<stem>.json" sidecar (kind, residual, tolerance).
void write_profile(const std::filesystem::path& bin_path, const Profile& p);
Profile read_profile(const std::filesystem::path& bin_path);

}  // namespace cnls
