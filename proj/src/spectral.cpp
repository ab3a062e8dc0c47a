#include "cnls/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "cnls/error.hpp"

namespace cnls {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are created once per (shape, sign) and kept for the process lifetime.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(const std::vector<int>& n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int m : n) total *= static_cast<std::size_t>(m);
    fftw_complex* scratch = fftw_alloc_complex(total);
    // ESTIMATE keeps the algorithm choice independent of timing noise, so
    // identical inputs give bit-identical outputs across runs.
    fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    require(plan != nullptr, "FFTW failed to create a plan", ErrorKind::solver);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

class ExtendedPlanCache {
 public:
  static ExtendedPlanCache& instance() {
    static ExtendedPlanCache cache;
    return cache;
  }

  fftwl_plan get(const std::vector<int>& n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int m : n) total *= static_cast<std::size_t>(m);
    fftwl_complex* scratch = fftwl_alloc_complex(total);
    fftwl_plan plan = fftwl_plan_dft(static_cast<int>(n.size()), n.data(), scratch, scratch, sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftwl_free(scratch);
    require(plan != nullptr, "FFTW failed to create a plan", ErrorKind::solver);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

  ~ExtendedPlanCache() {
    for (auto& [key, plan] : plans_) fftwl_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<int>, int>, fftwl_plan> plans_;
};

void execute(const Grid& grid, std::span<cplx> data, int sign) {
  require(data.size() == grid.size(), "transform size does not match grid");
  fftw_plan plan = PlanCache::instance().get(grid.points(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft_forward(const Grid& grid, std::span<cplx> data) { execute(grid, data, FFTW_FORWARD); }

void fft_inverse(const Grid& grid, std::span<cplx> data) {
  execute(grid, data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& z : data) z *= scale;
}

void fourier_multiply_extended(const Grid& grid, std::span<cplx> data,
                               std::span<const std::complex<long double>> m) {
  require(data.size() == grid.size() && m.size() == grid.size(), "transform size does not match grid");
  auto& cache = ExtendedPlanCache::instance();
  fftwl_plan fwd = cache.get(grid.points(), FFTW_FORWARD);
  fftwl_plan bwd = cache.get(grid.points(), FFTW_BACKWARD);
  thread_local std::vector<std::complex<long double>> work;
  work.assign(data.begin(), data.end());
  auto* ptr = reinterpret_cast<fftwl_complex*>(work.data());
  fftwl_execute_dft(fwd, ptr, ptr);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= m[i];
  fftwl_execute_dft(bwd, ptr, ptr);
  const long double scale = 1.0L / static_cast<long double>(grid.size());
  for (std::size_t i = 0; i < work.size(); ++i) data[i] = cplx(work[i] * scale);
}

std::vector<cplx> spectrum(const Field& f) {
  std::vector<cplx> c(f.data());
  fft_forward(f.grid(), c);
  return c;
}

Field from_spectrum(GridPtr grid, std::vector<cplx> coeffs) {
  fft_inverse(*grid, coeffs);
  return Field(std::move(grid), std::move(coeffs));
}

Field partial_derivative(const Field& f, int axis) {
  const Grid& g = f.grid();
  require(axis >= 0 && axis < g.dim(), "derivative axis out of range");
  auto c = spectrum(f);
  const auto& k = g.wavenumbers(axis);
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const int i = g.unravel(idx)[axis];
    c[idx] = g.is_nyquist(axis, i) ? cplx{0.0, 0.0} : cplx{0.0, k[i]} * c[idx];
  }
  return from_spectrum(f.grid_ptr(), std::move(c));
}

std::vector<Field> spectral_gradient(const Field& f) {
  const Grid& g = f.grid();
  const auto c0 = spectrum(f);
  std::vector<Field> out;
  out.reserve(g.dim());
  for (int axis = 0; axis < g.dim(); ++axis) {
    auto c = c0;
    const auto& k = g.wavenumbers(axis);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
      const int i = g.unravel(idx)[axis];
      c[idx] = g.is_nyquist(axis, i) ? cplx{0.0, 0.0} : cplx{0.0, k[i]} * c[idx];
    }
    out.push_back(from_spectrum(f.grid_ptr(), std::move(c)));
  }
  return out;
}

Field laplacian(const Field& f) {
  auto c = spectrum(f);
  const auto& k2 = f.grid().k_squared();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -k2[i];
  return from_spectrum(f.grid_ptr(), std::move(c));
}

Field fourier_shift(const Field& f, std::span<const double> offset) {
  const Grid& g = f.grid();
  require(static_cast<int>(offset.size()) == g.dim(), "shift vector length must match grid dim");
  auto c = spectrum(f);
  // Per-axis phase tables; the Nyquist mode uses its real (cosine) part so a
  // real field stays real under the shift.
  std::vector<std::vector<cplx>> phase(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    const auto& k = g.wavenumbers(a);
    phase[a].resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double arg = -k[i] * offset[a];
      phase[a][i] = g.is_nyquist(a, static_cast<int>(i)) ? cplx{std::cos(arg), 0.0}
                                                         : std::polar(1.0, arg);
    }
  }
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const auto ii = g.unravel(idx);
    cplx ph{1.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) ph *= phase[a][ii[a]];
    c[idx] *= ph;
  }
  return from_spectrum(f.grid_ptr(), std::move(c));
}

void dealias_mask(const Grid& grid, std::span<cplx> coeffs) {
  for (std::size_t idx = 0; idx < coeffs.size(); ++idx) {
    const auto ii = grid.unravel(idx);
    for (int a = 0; a < grid.dim(); ++a) {
      const int n = grid.points(a);
      const int m = ii[a] <= n / 2 ? ii[a] : n - ii[a];
      if (3 * m > n) {
        coeffs[idx] = cplx{0.0, 0.0};
        break;
      }
    }
  }
}

double norm_l2(const Field& f) {
  // Discrete Parseval: sum |f_j|^2 dV = (dV / N) sum |c_m|^2.
  const auto c = spectrum(f);
  double s = 0.0;
  for (const auto& z : c) s += std::norm(z);
  const Grid& g = f.grid();
  return std::sqrt(s * g.cell_volume() / static_cast<double>(g.size()));
}

double norm_h1(const Field& f) {
  const auto c = spectrum(f);
  const Grid& g = f.grid();
  const auto& k2 = g.k_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += (1.0 + k2[i]) * std::norm(c[i]);
  return std::sqrt(s * g.cell_volume() / static_cast<double>(g.size()));
}

double norm_lp(const Field& f, int p) {
  require(p >= 1, "L^p norm needs p >= 1");
  double s = 0.0;
  for (const auto& z : f.values()) s += std::pow(std::abs(z), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double norm_linf(const Field& f) {
  double m = 0.0;
  for (const auto& z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double pair_norm(const FieldPair& p, PairNorm kind) {
  const double a = kind == PairNorm::l2 ? norm_l2(p.first) : norm_h1(p.first);
  const double b = kind == PairNorm::l2 ? norm_l2(p.second) : norm_h1(p.second);
  return std::sqrt(a * a + b * b);
}

cplx inner(const Field& f, const Field& g) {
  require(f.same_grid(g), "inner product on mismatched grids");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * std::conj(g[i]);
  return s * f.grid().cell_volume();
}

double inner_real(const Field& f, const Field& g) { return inner(f, g).real(); }

double integrate(const Grid& grid, std::span<const double> density) {
  require(density.size() == grid.size(), "density size does not match grid");
  double s = 0.0;
  for (double d : density) s += d;
  return s * grid.cell_volume();
}

}  // namespace cnls
