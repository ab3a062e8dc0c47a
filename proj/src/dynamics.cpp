#include "cnls/dynamics.hpp"

#include <cmath>

#include "cnls/error.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

void EvolveConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "evolve: dt must be positive", ErrorKind::config);
  require(record_every >= 1, "evolve: record_every must be >= 1", ErrorKind::config);
  require(snapshot_every >= 0, "evolve: snapshot_every must be >= 0", ErrorKind::config);
  require(std::isfinite(mu1) && std::isfinite(mu2) && std::isfinite(beta),
          "evolve: couplings must be finite", ErrorKind::config);
}

bool default_dealias(const Grid& grid) {
  if (grid.dim() > 1) return true;
  return grid.points(0) < 4096;
}

namespace {

struct Propagator {
  std::vector<cplx> m;
  std::vector<std::complex<long double>> extended;
};

Propagator free_multiplier(const Grid& grid, double dt_signed, bool dealias, bool extended = false) {
  const auto& k2 = grid.k_squared();
  Propagator p;
  p.m.resize(k2.size());
  for (std::size_t i = 0; i < p.m.size(); ++i) p.m[i] = std::polar(1.0, -k2[i] * dt_signed);
  if (dealias) dealias_mask(grid, p.m);
  if (extended) {
    p.extended.resize(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i)
      p.extended[i] = p.m[i] == cplx(0.0, 0.0)
                          ? std::complex<long double>(0.0L)
                          : std::polar(1.0L, -static_cast<long double>(k2[i]) * dt_signed);
  }
  return p;
}

void apply_multiplier(const Grid& grid, std::vector<cplx>& u, const Propagator& p) {
  if (!p.extended.empty()) {
    fourier_multiply_extended(grid, u, p.extended);
    return;
  }
  fft_forward(grid, u);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= p.m[i];
  fft_inverse(grid, u);
}

void rotate_phases(std::vector<cplx>& u1, std::vector<cplx>& u2, double dt_signed, double mu1,
                   double mu2, double beta) {
  for (std::size_t i = 0; i < u1.size(); ++i) {
    const double a1 = std::norm(u1[i]);
    const double a2 = std::norm(u2[i]);
    u1[i] *= std::polar(1.0, dt_signed * (mu1 * a1 + beta * a2));
    u2[i] *= std::polar(1.0, dt_signed * (mu2 * a2 + beta * a1));
  }
}

bool finite(const std::vector<cplx>& u) {
  for (const auto& z : u)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

FieldPair linear_halfstep(const FieldPair& p, double dt_signed, bool dealias) {
  const Grid& g = p.grid();
  const auto m = free_multiplier(g, dt_signed, dealias);
  auto u1 = p.first.data();
  auto u2 = p.second.data();
  apply_multiplier(g, u1, m);
  apply_multiplier(g, u2, m);
  return FieldPair(Field(p.first.grid_ptr(), std::move(u1)), Field(p.first.grid_ptr(), std::move(u2)));
}

FieldPair nonlinear_step(const FieldPair& p, double dt_signed, double mu1, double mu2, double beta) {
  auto u1 = p.first.data();
  auto u2 = p.second.data();
  rotate_phases(u1, u2, dt_signed, mu1, mu2, beta);
  return FieldPair(Field(p.first.grid_ptr(), std::move(u1)), Field(p.first.grid_ptr(), std::move(u2)));
}

FieldPair strang_step(const FieldPair& p, const EvolveConfig& cfg) {
  const double h = cfg.signed_dt();
  const Grid& g = p.grid();
  const auto m = free_multiplier(g, 0.5 * h, cfg.dealias, cfg.extended_precision);
  auto u1 = p.first.data();
  auto u2 = p.second.data();
  apply_multiplier(g, u1, m);
  apply_multiplier(g, u2, m);
  rotate_phases(u1, u2, h, cfg.mu1, cfg.mu2, cfg.beta);
  apply_multiplier(g, u1, m);
  apply_multiplier(g, u2, m);
  return FieldPair(Field(p.first.grid_ptr(), std::move(u1)), Field(p.first.grid_ptr(), std::move(u2)));
}

Trajectory evolve(const FieldPair& initial, double t_from, double t_to, const EvolveConfig& cfg,
                  const Monitor& monitor) {
  cfg.validate();
  const double span = t_to - t_from;
  require(span == 0.0 || (span > 0.0) == (cfg.direction == Direction::forward),
          "evolve: time interval orientation does not match the direction", ErrorKind::config);

  const Grid& g = initial.grid();
  const GridPtr grid = initial.first.grid_ptr();
  const double h = cfg.signed_dt();
  const double steps_exact = std::abs(span) / cfg.dt;
  long full_steps = static_cast<long>(std::floor(steps_exact + 1e-9));
  const double remainder = std::abs(span) - full_steps * cfg.dt;
  const bool partial = remainder > 1e-9 * cfg.dt;
  const long total_steps = full_steps + (partial ? 1 : 0);

  Trajectory traj;
  traj.partial_step = partial;

  std::vector<cplx> u1 = initial.first.data();
  std::vector<cplx> u2 = initial.second.data();
  std::size_t records = 0;

  auto record = [&](double t) {
    traj.times.push_back(t);
    if (monitor || cfg.snapshot_every > 0) {
      FieldPair state(Field(grid, u1), Field(grid, u2));
      if (monitor) traj.monitor_rows.push_back(monitor(t, state));
      if (cfg.snapshot_every > 0 && records % cfg.snapshot_every == 0) {
        traj.snapshots.push_back(std::move(state));
        traj.snapshot_times.push_back(t);
      }
    }
    ++records;
  };

  record(t_from);

  // Consecutive linear half steps are fused into one transform pair; the
  // pending half step is flushed before every record.
  const bool ext = cfg.extended_precision;
  const auto half = free_multiplier(g, 0.5 * h, cfg.dealias, ext);
  const auto full = free_multiplier(g, h, cfg.dealias, ext);
  bool pending = false;
  for (long s = 1; s <= total_steps; ++s) {
    const bool last = s == total_steps;
    const double step = (last && partial) ? (h > 0 ? remainder : -remainder) : h;
    const double t = last ? t_to : t_from + static_cast<double>(s) * h;

    if (last && partial) {
      if (pending) {
        apply_multiplier(g, u1, half);
        apply_multiplier(g, u2, half);
      }
      const auto m = free_multiplier(g, 0.5 * step, cfg.dealias, ext);
      apply_multiplier(g, u1, m);
      apply_multiplier(g, u2, m);
      rotate_phases(u1, u2, step, cfg.mu1, cfg.mu2, cfg.beta);
      apply_multiplier(g, u1, m);
      apply_multiplier(g, u2, m);
      pending = false;
    } else {
      const auto& m = pending ? full : half;
      apply_multiplier(g, u1, m);
      apply_multiplier(g, u2, m);
      rotate_phases(u1, u2, step, cfg.mu1, cfg.mu2, cfg.beta);
      pending = true;
    }

    if (!finite(u1) || !finite(u2)) {
      traj.blow_up = true;
      traj.blow_up_time = t;
      return traj;
    }

    if (last || s % cfg.record_every == 0) {
      if (pending) {
        apply_multiplier(g, u1, half);
        apply_multiplier(g, u2, half);
        pending = false;
      }
      record(t);
    }
  }

  traj.final_state.emplace(Field(grid, std::move(u1)), Field(grid, std::move(u2)));
  return traj;
}

}  // namespace cnls
