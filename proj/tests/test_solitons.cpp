#include <doctest.h>

#include <cmath>

#include "cnls/error.hpp"
#include "cnls/functionals.hpp"
#include "cnls/profiles.hpp"
#include "cnls/solitons.hpp"
#include "cnls/spectral.hpp"
#include "oracles.hpp"

using namespace cnls;

namespace {

SolitonParams params1d(double omega, double gamma, double x0, double v, double mu = 1.0) {
  SolitonParams p;
  p.omega = omega;
  p.gamma = gamma;
  p.x0 = {x0};
  p.v = {v};
  p.mu = mu;
  return p;
}

double max_diff_vs_oracle(const Field& f, const SolitonParams& p, double t) {
  const Grid& g = f.grid();
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto ref = oracle::soliton_1d(g.point(i)[0], t, p.omega, p.gamma, p.x0[0], p.v[0], p.mu, g.length(0));
    err = std::max(err, std::abs(f[i] - ref));
  }
  return err;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params1d(0.0, 0, 0, 0).validate(1), Error);
  CHECK_THROWS_AS(params1d(1.0, 0, 0, 0, -1.0).validate(1), Error);
  CHECK_THROWS_AS(params1d(1.0, 0, 0, 0).validate(2), Error);
  CHECK_NOTHROW(params1d(1.0, 0, 0, 0).validate(1));
  const auto c = params1d(1.0, 0, 2.0, -3.0).center(2.0);
  CHECK(c[0] == doctest::Approx(-4.0));
}

TEST_CASE("identity case reproduces the profile samples") {
  const auto g = make_grid(1, 1024, 80.0);
  const Profile phi = ground_state_1d(g);
  const Field r = soliton_field(params1d(1, 0, 0, 0), phi, 0.0, g);
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == phi.field[i]);
}

TEST_CASE("soliton formula against the pointwise oracle") {
  const auto g = make_grid(1, 2048, 160.0);
  const Profile phi = ground_state_1d(g);
  for (const auto& p : {params1d(1.0, 0.3, 5.0, 2.0), params1d(4.0, -1.0, -10.0, -3.5, 2.0),
                        params1d(0.5, 2.0, 0.0, 1.0, 0.5)}) {
    for (double t : {0.0, 1.7, -2.3}) {
      const Field r = soliton_field(p, phi, t, g);
      CHECK(max_diff_vs_oracle(r, p, t) < 1e-11);
    }
  }
}

TEST_CASE("resampling from a separate profile grid") {
  // Profile on a coarser, smaller box; target box larger and finer.
  const auto pg = make_grid(1, 512, 60.0);
  const Profile phi = ground_state_1d(pg);
  const auto g = make_grid(1, 2048, 128.0);
  const auto p = params1d(2.0, 0.5, -7.0, 1.5);
  const Field r = soliton_field(p, phi, 0.8, g);
  CHECK(max_diff_vs_oracle(r, p, 0.8) < 1e-9);
}

TEST_CASE("modulus is independent of the phase parameter") {
  const auto g = make_grid(1, 1024, 80.0);
  const Profile phi = ground_state_1d(g);
  const Field a = soliton_field(params1d(1, 0.0, 3, 1), phi, 1.0, g);
  const Field b = soliton_field(params1d(1, 2.1, 3, 1), phi, 1.0, g);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i]) == doctest::Approx(std::abs(b[i])).epsilon(1e-12));
}

TEST_CASE("mass of a scaled soliton and its Galilean invariance") {
  const auto g = make_grid(1, 2048, 120.0);
  const Profile phi = ground_state_1d(g);
  // 1/2 (omega/mu) omega^{-1/2} ||Phi||^2 = 1/2 * 4 * 1/2 * 4 = 4.
  CHECK(mass(soliton_field(params1d(4.0, 0, 0, 0), phi, 0.0, g)) == doctest::Approx(4.0).epsilon(1e-12));
  const double m0 = mass(soliton_field(params1d(1.0, 0, 0, 0), phi, 0.0, g));
  for (double v : {0.5, 3.0})
    for (double t : {0.0, 2.5})
      for (double gamma : {0.0, 1.0})
        CHECK(std::abs(mass(soliton_field(params1d(1.0, gamma, -5, v), phi, t, g)) - m0) < 1e-12);
}

TEST_CASE("momentum convention P(R) = -(v/4)||R||^2") {
  const auto g = make_grid(1, 2048, 120.0);
  const Profile phi = ground_state_1d(g);
  for (double v : {-3.0, 1.0, 4.0}) {
    const Field r = soliton_field(params1d(1.0, 0.0, 0.0, v), phi, 0.0, g);
    const double l2 = norm_l2(r);
    CHECK(momentum(r)[0] == doctest::Approx(-v / 4.0 * l2 * l2).epsilon(1e-10));
  }
}

TEST_CASE("pair solitons and family derived quantities") {
  const auto g = make_grid(1, 2048, 160.0);
  const Profile phi = ground_state_1d(g);
  SolitonFamily fam{{params1d(1, 0, 0, 4), params1d(1, 0, 0, -4)}, {phi, phi}};
  CHECK(fam.v_star() == 8.0);
  CHECK(fam.omega_star() == 0.25);
  CHECK(fam.rate() == 4.0);

  // Symmetric family at t = 0: equal moduli.
  const FieldPair p = pair_solitons(fam, 0.0, g);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(p.first[i]) == doctest::Approx(std::abs(p.second[i])).epsilon(1e-13));

  // Standing waves keep their moduli.
  SolitonFamily still{{params1d(1, 0, -20, 0), params1d(2, 1, 20, 0)}, {phi, phi}};
  const FieldPair a = pair_solitons(still, 0.0, g), b = pair_solitons(still, 7.3, g);
  double d = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    d = std::max(d, std::abs(std::abs(a.first[i]) - std::abs(b.first[i])));
    d = std::max(d, std::abs(std::abs(a.second[i]) - std::abs(b.second[i])));
  }
  CHECK(d < 1e-13);

  // omega_star uses the smaller frequency.
  SolitonFamily mixed{{params1d(4, 0, 0, 1), params1d(2, 0, 0, -1)}, {phi, phi}};
  CHECK(mixed.omega_star() == 0.5);
  CHECK(mixed.rate() == doctest::Approx(std::sqrt(0.5) * 2.0));
}

TEST_CASE("seam check rejects centres that meet through the boundary") {
  const auto g = make_grid(1, 1024, 80.0);
  const Profile phi = ground_state_1d(g);
  // Centres 50 apart: the seam distance is 30 >= 20, accepted.
  SolitonFamily ok{{params1d(1, 0, -25, 0), params1d(1, 0, 25, 0)}, {phi, phi}};
  CHECK_NOTHROW(check_seam(ok, 0.0, *g));
  // Centres 70 apart leave only 10 through the seam.
  SolitonFamily bad{{params1d(1, 0, -35, 0), params1d(1, 0, 35, 0)}, {phi, phi}};
  CHECK_THROWS_AS(check_seam(bad, 0.0, *g), Error);
  CHECK_THROWS_AS(SolitonPair(bad, g).at(0.0), Error);
}

TEST_CASE("tails that wrap onto themselves are rejected") {
  const auto g = make_grid(1, 256, 20.0);
  const auto pg = make_grid(1, 1024, 80.0);
  const Profile phi = ground_state_1d(pg);
  // omega = 0.05 widens the wave to ~ 4.5 per e-fold; the 20-box cannot hold it.
  CHECK_THROWS_AS(soliton_field(params1d(0.05, 0, 0, 0), phi, 0.0, g), Error);
}

TEST_CASE("2D soliton matches the radially scaled Townes samples") {
  const auto g = make_grid(2, 256, 40.0);
  const Profile phi = petviashvili(g, PetviashviliOptions{});
  SolitonParams p;
  p.x0 = {0.0, 0.0};
  p.v = {0.0, 0.0};
  const Field r = soliton_field(p, phi, 0.0, g);
  double same = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) same = std::max(same, std::abs(r[i] - phi.field[i]));
  CHECK(same < 1e-14);
  // Translation by whole grid cells is exact for the interpolant.
  SolitonParams q = p;
  q.x0 = {2 * g->spacing(0), -3 * g->spacing(1)};
  const Field s = soliton_field(q, phi, 0.0, g);
  const int n = 256;
  const auto idx = [&](int a, int b) { return static_cast<std::size_t>(((a % n + n) % n) * n + (b % n + n) % n); };
  double err = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) err = std::max(err, std::abs(s[idx(a, b)] - phi.field[idx(a - 2, b + 3)]));
  CHECK(err < 1e-12);
}
