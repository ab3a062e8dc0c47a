#pragma once

#include <array>
#include <vector>

#include "cnls/grid.hpp"
#include "cnls/profiles.hpp"

namespace cnls {

/// One solitary wave: frequency, phase, initial centre, velocity and the
/// self-interaction coefficient of its component.
struct SolitonParams {
  double omega = 1.0;
  double gamma = 0.0;
  std::vector<double> x0;
  std::vector<double> v;
  double mu = 1.0;

  void validate(int dim) const;
  /// x0 + v t, not reduced modulo the box.
  std::vector<double> center(double t) const;
};

struct SolitonFamily {
  std::array<SolitonParams, 2> params;
  std::array<Profile, 2> profiles;

  /// |v1 - v2|
  double v_star() const;
  /// min(omega1, omega2) / 4
  double omega_star() const;
  /// sqrt(omega_star) * v_star, the decay rate of the approximation error.
  double rate() const;
};

/// Relative tail level at which a scaled profile is considered to wrap onto
/// itself through the periodic boundary.
inline constexpr double kSolitonTailTolerance = 1e-8;

/// Minimal distance (in units of 1/sqrt(omega_min)) allowed between the two
/// centres measured through the periodic seam.
inline constexpr double kSeamWidth = 20.0;

/// The transform  f -> e^{i(omega t - |v|^2 t/4 + v.x/2 + gamma)} sqrt(omega/mu) f(sqrt(omega)(x - v t - x0))
/// applied to a centred shape sampled on its own grid, evaluated on `grid`.
/// The shape is resampled once with its trigonometric interpolant; each
/// evaluation is a Fourier shift to the (periodically wrapped) centre.
class BoostedShape {
 public:
  BoostedShape(const Field& shape, SolitonParams params, GridPtr grid, bool check_tail = true);

  Field at(double t) const;
  const SolitonParams& params() const noexcept { return params_; }
  /// sqrt(omega/mu) shape(sqrt(omega) y) on the target grid, centred at 0.
  const Field& envelope() const noexcept { return envelope_; }

 private:
  SolitonParams params_;
  GridPtr grid_;
  Field envelope_;
};

Field soliton_field(const SolitonParams& params, const Profile& profile, double t,
                    const GridPtr& grid);

/// Same transform applied to an arbitrary shape (no tail check).
Field boost_transform(const Field& shape, const SolitonParams& params, double t,
                      const GridPtr& grid);

/// Throws if the two centres come within kSeamWidth/sqrt(omega_min) of each
/// other through the periodic boundary at time t.
void check_seam(const SolitonFamily& family, double t, const Grid& grid);

/// Cached evaluator for (R1(t), R2(t)).
class SolitonPair {
 public:
  SolitonPair(const SolitonFamily& family, GridPtr grid);
  FieldPair at(double t) const;
  const BoostedShape& first() const noexcept { return first_; }
  const BoostedShape& second() const noexcept { return second_; }

 private:
  SolitonFamily family_;
  GridPtr grid_;
  BoostedShape first_;
  BoostedShape second_;
};

FieldPair pair_solitons(const SolitonFamily& family, double t, const GridPtr& grid);

}  // namespace cnls
