#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cnls/grid.hpp"

namespace cnls {

enum class Direction { forward, backward };

struct EvolveConfig {
  double dt = 1e-3;  // step magnitude, sign taken from direction
  Direction direction = Direction::forward;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double beta = 0.0;
  bool dealias = false;
  int record_every = 1;
  /// Keep a snapshot every this many records (0 keeps none).
  int snapshot_every = 0;
  /// Run the linear substeps with long double transforms (about ten times
  /// slower; removes the drift of the mass caused by transform rounding).
  bool extended_precision = false;

  double signed_dt() const { return direction == Direction::forward ? dt : -dt; }
  void validate() const;
};

/// Default dealiasing policy: on in 2D/3D, off in 1D at n >= 4096.
bool default_dealias(const Grid& grid);

/// Called on the state at every recorded time; returns one monitor row.
/// Must be reentrant: evolve calls on different threads share nothing else.
using Monitor = std::function<std::vector<double>(double t, const FieldPair& state)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<FieldPair> snapshots;
  std::vector<double> snapshot_times;
  std::vector<std::vector<double>> monitor_rows;
  std::optional<FieldPair> final_state;
  bool blow_up = false;
  double blow_up_time = 0.0;
  bool partial_step = false;  // the last step was shortened to land on t_to
};

/// Free flow over dt_signed: every Fourier mode times exp(-i |k|^2 dt_signed).
FieldPair linear_halfstep(const FieldPair& p, double dt_signed, bool dealias = false);

/// Exact flow of the potential part with moduli frozen at entry.
FieldPair nonlinear_step(const FieldPair& p, double dt_signed, double mu1, double mu2, double beta);

/// Symmetric composition: linear dt/2, nonlinear dt, linear dt/2.
FieldPair strang_step(const FieldPair& p, const EvolveConfig& cfg);

/// Integrates from t_from to t_to with repeated Strang steps. The monitor
/// (if any) runs on the initial state, every record_every steps and on the
/// final state. A non-finite state stops the run with blow_up set.
Trajectory evolve(const FieldPair& initial, double t_from, double t_to, const EvolveConfig& cfg,
                  const Monitor& monitor = {});

}  // namespace cnls
