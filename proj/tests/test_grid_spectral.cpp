#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "cnls/error.hpp"
#include "cnls/field_io.hpp"
#include "cnls/grid.hpp"
#include "cnls/spectral.hpp"
#include "oracles.hpp"

using namespace cnls;
using std::numbers::pi;

namespace {

Field random_field(const GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = {nd(rng), nd(rng)};
  return f;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid validation rejects bad shapes") {
  CHECK_THROWS_AS(make_grid(0, 64, 10.0), Error);
  CHECK_THROWS_AS(make_grid(4, 64, 10.0), Error);
  CHECK_THROWS_AS(make_grid(1, 100, 10.0), Error);
  CHECK_THROWS_AS(make_grid(1, 4, 10.0), Error);
  CHECK_THROWS_AS(make_grid(1, 64, -1.0), Error);
  CHECK_THROWS_AS(make_grid(2, std::vector<int>{64, 64, 64}, std::vector<double>{1.0, 1.0}), Error);
  CHECK_NOTHROW(make_grid(3, 8, 1.0));
}

TEST_CASE("coordinates, spacing and wavenumbers") {
  const auto g = make_grid(2, std::vector<int>{16, 8}, std::vector<double>{4.0, 2.0});
  CHECK(g->size() == 128);
  CHECK(g->spacing(0) == doctest::Approx(0.25));
  CHECK(g->coordinate(0, 0) == doctest::Approx(-2.0));
  CHECK(g->coordinate(0, 8) == doctest::Approx(0.0));
  CHECK(g->cell_volume() == doctest::Approx(0.25 * 0.25));
  const auto& k = g->wavenumbers(0);
  CHECK(k[1] == doctest::Approx(2 * pi / 4.0));
  CHECK(k[15] == doctest::Approx(-2 * pi / 4.0));
  CHECK(k[8] == doctest::Approx(8 * 2 * pi / 4.0));
  CHECK(g->is_nyquist(0, 8));
  const auto idx = g->unravel(8 * 3 + 5);
  CHECK(idx[0] == 3);
  CHECK(idx[1] == 5);
  const auto x = g->point(8 * 3 + 5);
  CHECK(x[0] == doctest::Approx(-2.0 + 0.75));
  CHECK(x[1] == doctest::Approx(-1.0 + 5 * 0.25));
}

TEST_CASE("FFT round trip and Parseval on 1D/2D/3D") {
  for (int dim = 1; dim <= 3; ++dim) {
    const auto g = make_grid(dim, dim == 3 ? 8 : 32, 5.0);
    const Field f = random_field(g, 7 + dim);
    Field h = f;
    fft_forward(*g, h.values());
    double energy_k = 0.0;
    for (const auto& c : h.values()) energy_k += std::norm(c);
    fft_inverse(*g, h.values());
    CHECK(max_abs_diff(f, h) < 1e-12);
    double energy_x = 0.0;
    for (const auto& c : f.values()) energy_x += std::norm(c);
    CHECK(energy_k / static_cast<double>(g->size()) == doctest::Approx(energy_x).epsilon(1e-12));
  }
}

TEST_CASE("spectral derivatives of trigonometric polynomials are exact") {
  const double L = 2 * pi * 3;
  const auto g = make_grid(1, 64, L);
  const Field f = Field::from_function(g, [](auto x) { return cplx(std::sin(2 * x[0] / 3.0), std::cos(x[0] / 3.0)); });
  const Field df = partial_derivative(f, 0);
  const Field lap = laplacian(f);
  double err_d = 0.0, err_l = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g->point(i)[0];
    err_d = std::max(err_d, std::abs(df[i] - cplx(2.0 / 3 * std::cos(2 * x / 3), -std::sin(x / 3) / 3)));
    err_l = std::max(err_l, std::abs(lap[i] - cplx(-4.0 / 9 * std::sin(2 * x / 3), -std::cos(x / 3) / 9)));
  }
  CHECK(err_d < 1e-12);
  CHECK(err_l < 1e-12);
}

TEST_CASE("spectral Laplacian agrees with finite differences on a smooth bump") {
  const auto g = make_grid(1, 1024, 40.0);
  const Field f = Field::from_function(g, [](auto x) { return cplx(std::exp(-x[0] * x[0]), 0.0); });
  const Field lap = laplacian(f);
  std::vector<double> re(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) re[i] = f[i].real();
  const auto fd = oracle::fd_second(re, g->spacing(0));
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(lap[i].real() - fd[i]));
  // O(h^2) difference between the two discretizations.
  CHECK(err < 2e-3);
}

TEST_CASE("gradient drops the Nyquist mode of the differentiated axis") {
  const auto g = make_grid(1, 16, 16.0);
  Field f = Field::from_function(g, [](auto x) { return cplx(std::cos(pi * x[0]), 0.0); });
  const Field df = partial_derivative(f, 0);
  CHECK(norm_linf(df) < 1e-12);
}

TEST_CASE("gradient in 2D") {
  const auto g = make_grid(2, 32, 2 * pi);
  const Field f = Field::from_function(g, [](auto x) { return cplx(std::sin(x[0]) * std::cos(2 * x[1]), 0.0); });
  const auto grad = spectral_gradient(f);
  REQUIRE(grad.size() == 2);
  double e0 = 0.0, e1 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g->point(i);
    e0 = std::max(e0, std::abs(grad[0][i] - std::cos(x[0]) * std::cos(2 * x[1])));
    e1 = std::max(e1, std::abs(grad[1][i] + 2 * std::sin(x[0]) * std::sin(2 * x[1])));
  }
  CHECK(e0 < 1e-12);
  CHECK(e1 < 1e-12);
}

TEST_CASE("fourier shift translates band-limited data exactly") {
  const auto g = make_grid(1, 256, 40.0);
  const Field f = Field::from_function(g, [](auto x) { return cplx(std::exp(-x[0] * x[0]), std::exp(-2 * x[0] * x[0])); });
  const double off[] = {3.3};
  const Field s = fourier_shift(f, off);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double y = g->point(i)[0] - 3.3;
    err = std::max(err, std::abs(s[i] - cplx(std::exp(-y * y), std::exp(-2 * y * y))));
  }
  CHECK(err < 1e-12);
  // Shifting back recovers the original samples.
  const double back[] = {-3.3};
  CHECK(max_abs_diff(fourier_shift(s, back), f) < 1e-12);
  // Shift by a whole period is the identity.
  const double period[] = {40.0};
  CHECK(max_abs_diff(fourier_shift(f, period), f) < 1e-12);
}

TEST_CASE("dealias mask keeps |m| <= n/3 only") {
  const auto g = make_grid(1, 64, 1.0);
  std::vector<cplx> c(g->size(), cplx(1.0, 0.0));
  dealias_mask(*g, c);
  const int n = g->points(0);
  for (int i = 0; i < n; ++i) {
    const int m = i <= n / 2 ? i : i - n;
    const bool kept = 3 * std::abs(m) <= n;
    CHECK((std::abs(c[i]) == 1.0) == kept);
  }
}

TEST_CASE("norms against closed forms") {
  const auto g = make_grid(1, 2048, 60.0);
  const Field phi = Field::from_function(g, [](auto x) { return cplx(std::sqrt(2.0) * oracle::sech(x[0]), 0.0); });
  // ||sqrt2 sech||_2^2 = 4, ||.||_4^4 = 16/3, ||(.)'||_2^2 = 4/3.
  CHECK(norm_l2(phi) * norm_l2(phi) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::pow(norm_lp(phi, 4), 4) == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
  CHECK(norm_h1(phi) * norm_h1(phi) == doctest::Approx(4.0 + 4.0 / 3.0).epsilon(1e-12));
  CHECK(norm_linf(phi) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  const FieldPair p(phi, cplx(0.0, 2.0) * phi);
  CHECK(pair_norm(p, PairNorm::l2) == doctest::Approx(std::sqrt(4.0 + 16.0)).epsilon(1e-12));
}

TEST_CASE("inner products: Hermitian symmetry, linearity and Cauchy-Schwarz") {
  const auto g = make_grid(2, 16, 3.0);
  const Field f = random_field(g, 1), h = random_field(g, 2);
  CHECK(std::abs(inner(f, h) - std::conj(inner(h, f))) < 1e-10);
  const cplx a(0.3, -1.2);
  CHECK(std::abs(inner(a * f, h) - a * inner(f, h)) < 1e-10);
  CHECK(std::abs(inner(f, h)) <= norm_l2(f) * norm_l2(h) + 1e-12);
  CHECK(inner_real(f, f) == doctest::Approx(norm_l2(f) * norm_l2(f)));
  // Parallelogram law.
  const double lhs = std::pow(norm_l2(f + h), 2) + std::pow(norm_l2(f - h), 2);
  CHECK(lhs == doctest::Approx(2 * std::pow(norm_l2(f), 2) + 2 * std::pow(norm_l2(h), 2)));
}

TEST_CASE("field arithmetic requires matching grids") {
  const auto g1 = make_grid(1, 16, 1.0);
  const auto g2 = make_grid(1, 32, 1.0);
  Field a(g1), b(g2);
  CHECK_THROWS_AS(a += b, Error);
  CHECK_THROWS_AS(FieldPair(a, b), Error);
  // Structurally equal grids are compatible.
  Field c(make_grid(1, 16, 1.0));
  CHECK_NOTHROW(a += c);
}

TEST_CASE("binary container round trip and header layout") {
  const auto g = make_grid(2, std::vector<int>{16, 8}, std::vector<double>{3.0, 5.0});
  const Field f = random_field(g, 9);
  const auto path = std::filesystem::temp_directory_path() / "cnls_roundtrip.bin";
  write_field(path, f);
  const Field r = read_field(path);
  CHECK(r.grid() == *g);
  CHECK(max_abs_diff(f, r) == 0.0);
  CHECK(std::filesystem::file_size(path) == (1 + 2 + 2 + 2 * f.size()) * sizeof(double));
  std::ifstream is(path, std::ios::binary);
  double head[5];
  is.read(reinterpret_cast<char*>(head), sizeof head);
  CHECK(head[0] == 2.0);
  CHECK(head[1] == 16.0);
  CHECK(head[2] == 8.0);
  CHECK(head[3] == 3.0);
  CHECK(head[4] == 5.0);
  std::filesystem::remove(path);
}

TEST_CASE("reading a missing or truncated field is an I/O error") {
  const auto dir = std::filesystem::temp_directory_path();
  try {
    read_field(dir / "cnls_does_not_exist.bin");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  const auto path = dir / "cnls_truncated.bin";
  {
    std::ofstream os(path, std::ios::binary);
    const double d[3] = {1.0, 64.0, 10.0};
    os.write(reinterpret_cast<const char*>(d), sizeof d);
  }
  CHECK_THROWS_AS(read_field(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("CSV output for 1D fields") {
  const auto g = make_grid(1, 8, 8.0);
  const Field f = Field::from_function(g, [](auto x) { return cplx(x[0], -x[0]); });
  const auto path = std::filesystem::temp_directory_path() / "cnls_field.csv";
  write_field_csv(path, f);
  std::ifstream is(path);
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(header == "x,re,im,abs");
  CHECK(first.rfind("-4,-4,4,", 0) == 0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(write_field_csv(path, Field(make_grid(2, 8, 1.0))), Error);
}
