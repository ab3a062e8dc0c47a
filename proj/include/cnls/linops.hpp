#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "cnls/grid.hpp"
#include "cnls/profiles.hpp"
#include "cnls/solitons.hpp"

namespace cnls {

enum class OperatorKind { plus, minus };

/// L+ = -Lap + 1 - 3|Phi|^2  or  L- = -Lap + 1 - |Phi|^2  on the profile grid.
class LinearizedOperator {
 public:
  LinearizedOperator(OperatorKind kind, const Profile& profile);

  OperatorKind kind() const noexcept { return kind_; }
  const GridPtr& grid() const noexcept { return grid_; }
  /// 1 - c |Phi|^2 per grid point.
  const std::vector<double>& potential() const noexcept { return potential_; }

  std::vector<double> apply(std::span<const double> f) const;
  /// Acts on real and imaginary parts separately (real coefficients).
  Field apply(const Field& f) const;

 private:
  OperatorKind kind_;
  GridPtr grid_;
  std::vector<double> potential_;
};

std::pair<LinearizedOperator, LinearizedOperator> build_operators(const Profile& profile);

/// Lowest eigenpairs of one operator, ascending, eigenfunctions L2-normalized.
struct Spectrum {
  OperatorKind kind = OperatorKind::plus;
  std::vector<double> eigenvalues;
  std::vector<Field> eigenfunctions;
  std::vector<double> residuals;  // ||L xi - lambda xi||_{L2}
};

/// Dense symmetric solve in 1D, Lanczos with full reorthogonalization in 2D/3D.
Spectrum lowest_eigs(const LinearizedOperator& op, int k, double tol = 1e-8);

struct NonpositiveCount {
  int nu0 = 0;
  bool unstable = false;  // a numerically-zero mode sits outside the zero window
};

/// Eigenvalues below zero_tol count as non-positive (zero modes included).
/// Throws when a spectrum never reaches a positive eigenvalue.
NonpositiveCount count_nonpositive(std::span<const Spectrum> spectra, double zero_tol);

/// Default zero window, in units of the continuum threshold (which is 1).
inline constexpr double kDefaultZeroTol = 1e-6;

/// Eigenfunction carried by the same phase/boost/scaling as the soliton.
Field boosted_eigenfunction(const Field& xi, const SolitonParams& params, double t,
                            const GridPtr& grid);

struct SpectralReport {
  Spectrum plus;
  Spectrum minus;
  int nu0 = 0;
  bool nu0_unstable = false;
  double zero_tol = 0.0;
  double eig_tol = 0.0;
  double coercivity_estimate = 0.0;
  bool coercivity_positive = false;
};

SpectralReport spectral_report(const Profile& profile, int k, double tol, double zero_tol);

/// Complex directions to project out: boosted L+ modes as real directions,
/// boosted L- modes multiplied by i, for every eigenvalue below zero_tol.
std::vector<Field> projection_family(const SpectralReport& report, const SolitonParams& params,
                                     double t, const GridPtr& grid);

struct CoercivityResult {
  double c0 = 0.0;
  bool positive = false;
  int trials_used = 0;
  int skipped = 0;
  /// Fresh random batch: does c0 ||e||^2_{H1} <= H(e) + sum <e, xi_k>^2 hold?
  int fresh_checked = 0;
  int fresh_violations = 0;
};

/// Random band-limited complex direction (lowest n/4 modes per axis), unit L2 norm.
Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng);

CoercivityResult coercivity_estimate(const Profile& profile, const SolitonParams& params,
                                     const SpectralReport& report, double t, int trials,
                                     std::uint64_t seed);

/// Direct-sum version over both components of a family.
CoercivityResult vector_coercivity_estimate(const SolitonFamily& family,
                                            const std::array<SpectralReport, 2>& reports,
                                            const GridPtr& grid, double t, int trials,
                                            std::uint64_t seed);

/// JSON summary plus "<dir>/<prefix>_{plus,minus}_<k>.bin" eigenfunctions.
void write_spectral_report(const std::filesystem::path& dir, const std::string& prefix,
                           const SpectralReport& report);

}  // namespace cnls
