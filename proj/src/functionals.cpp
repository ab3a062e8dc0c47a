#include "cnls/functionals.hpp"

#include <cmath>

#include "cnls/error.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

namespace {

double gradient_sq(const Field& u) {
  // ||grad u||^2 via Parseval; the Nyquist mode is excluded to match
  // spectral_gradient.
  const auto c = spectrum(u);
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const auto ii = g.unravel(idx);
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a)
      if (!g.is_nyquist(a, ii[a])) k2 += g.wavenumbers(a)[ii[a]] * g.wavenumbers(a)[ii[a]];
    s += k2 * std::norm(c[idx]);
  }
  return s * g.cell_volume() / static_cast<double>(g.size());
}

double quartic(const Field& u) {
  double s = 0.0;
  for (const auto& z : u.values()) {
    const double m = std::norm(z);
    s += m * m;
  }
  return s * u.grid().cell_volume();
}

double squared(const Field& u) {
  double s = 0.0;
  for (const auto& z : u.values()) s += std::norm(z);
  return s * u.grid().cell_volume();
}

// Im int f grad(conj f), per axis.
std::vector<double> current(const Field& f) {
  const auto grad = spectral_gradient(f);
  std::vector<double> out(grad.size());
  for (std::size_t a = 0; a < grad.size(); ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] * std::conj(grad[a][i])).imag();
    out[a] = s * f.grid().cell_volume();
  }
  return out;
}

}  // namespace

double energy(const Field& u, double mu) { return 0.5 * gradient_sq(u) - 0.25 * mu * quartic(u); }

double mass(const Field& u) { return 0.5 * squared(u); }

std::vector<double> momentum(const Field& u) {
  auto j = current(u);
  for (auto& x : j) x *= 0.5;
  return j;
}

ScalarInvariants scalar_invariants(const Field& u, double mu) {
  return {energy(u, mu), mass(u), momentum(u)};
}

double coupling_overlap(const FieldPair& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.first.size(); ++i) s += std::norm(p.first[i]) * std::norm(p.second[i]);
  return s * p.grid().cell_volume();
}

SystemInvariants system_invariants(const FieldPair& p, double mu1, double mu2, double beta) {
  SystemInvariants out;
  out.energy1 = energy(p.first, mu1);
  out.energy2 = energy(p.second, mu2);
  out.mass1 = mass(p.first);
  out.mass2 = mass(p.second);
  out.coupling_overlap = coupling_overlap(p);
  out.total_energy = out.energy1 + out.energy2 - 0.5 * beta * out.coupling_overlap;
  const auto p1 = momentum(p.first);
  const auto p2 = momentum(p.second);
  out.total_momentum.resize(p1.size());
  for (std::size_t a = 0; a < p1.size(); ++a) out.total_momentum[a] = p1[a] + p2[a];
  return out;
}

double action_S(const Field& u, double mu, double omega, std::span<const double> v) {
  require(static_cast<int>(v.size()) == u.grid().dim(), "velocity length must match grid dim");
  double v2 = 0.0;
  for (double x : v) v2 += x * x;
  const auto p = momentum(u);
  double vp = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a) vp += v[a] * p[a];
  return energy(u, mu) + (omega + 0.25 * v2) * mass(u) + vp;
}

double vector_action(const FieldPair& p, const SolitonFamily& family) {
  const auto& a = family.params[0];
  const auto& b = family.params[1];
  return action_S(p.first, a.mu, a.omega, a.v) + action_S(p.second, b.mu, b.omega, b.v);
}

double linearized_action(const Field& base, const Field& eps, double mu, double omega,
                         std::span<const double> v) {
  require(base.same_grid(eps), "linearized action: base and direction on different grids");
  require(static_cast<int>(v.size()) == base.grid().dim(), "velocity length must match grid dim");
  double v2 = 0.0;
  for (double x : v) v2 += x * x;

  const auto j = current(eps);
  double vj = 0.0;
  for (std::size_t a = 0; a < v.size(); ++a) vj += v[a] * j[a];

  double potential = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const cplx u = base[i];
    const cplx e = eps[i];
    potential += 2.0 * std::norm(u) * std::norm(e) + (std::conj(u) * std::conj(u) * e * e).real();
  }
  potential *= base.grid().cell_volume();

  return gradient_sq(eps) + (omega + 0.25 * v2) * squared(eps) + vj - mu * potential;
}

double vector_linearized_action(const FieldPair& base, const FieldPair& eps,
                                const SolitonFamily& family) {
  require(base.same_grid(eps), "linearized action: base and direction on different grids");
  const auto& a = family.params[0];
  const auto& b = family.params[1];
  return linearized_action(base.first, eps.first, a.mu, a.omega, a.v) +
         linearized_action(base.second, eps.second, b.mu, b.omega, b.v);
}

}  // namespace cnls
