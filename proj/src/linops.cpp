#include "cnls/linops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <json.hpp>

#include "cnls/error.hpp"
#include "cnls/field_io.hpp"
#include "cnls/functionals.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

LinearizedOperator::LinearizedOperator(OperatorKind kind, const Profile& profile)
    : kind_(kind), grid_(profile.field.grid_ptr()) {
  const double c = kind == OperatorKind::plus ? 3.0 : 1.0;
  potential_.resize(profile.field.size());
  for (std::size_t i = 0; i < potential_.size(); ++i)
    potential_[i] = 1.0 - c * std::norm(profile.field[i]);
}

std::vector<double> LinearizedOperator::apply(std::span<const double> f) const {
  require(f.size() == grid_->size(), "operator applied to a field of the wrong size");
  std::vector<cplx> c(f.begin(), f.end());
  fft_forward(*grid_, c);
  const auto& k2 = grid_->k_squared();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= k2[i];
  fft_inverse(*grid_, c);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = c[i].real() + potential_[i] * f[i];
  return out;
}

Field LinearizedOperator::apply(const Field& f) const {
  require(*f.grid_ptr() == *grid_, "operator applied to a field on another grid");
  Field lap = laplacian(f);
  Field out(grid_);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = -lap[i] + potential_[i] * f[i];
  return out;
}

std::pair<LinearizedOperator, LinearizedOperator> build_operators(const Profile& profile) {
  return {LinearizedOperator(OperatorKind::plus, profile),
          LinearizedOperator(OperatorKind::minus, profile)};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Unit L2 norm under the grid quadrature, sign fixed so that the entry of
// largest modulus is positive.
Field normalized_mode(const GridPtr& grid, const VectorXd& v) {
  std::vector<cplx> vals(v.size());
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const double sign = v[arg] < 0.0 ? -1.0 : 1.0;
  const double scale = sign / (v.norm() * std::sqrt(grid->cell_volume()));
  for (Eigen::Index i = 0; i < v.size(); ++i) vals[i] = v[i] * scale;
  return Field(grid, std::move(vals));
}

double mode_residual(const LinearizedOperator& op, const Field& xi, double lambda) {
  std::vector<double> re(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) re[i] = xi[i].real();
  const auto lx = op.apply(re);
  double s = 0.0;
  for (std::size_t i = 0; i < re.size(); ++i) s += (lx[i] - lambda * re[i]) * (lx[i] - lambda * re[i]);
  return std::sqrt(s * op.grid()->cell_volume());
}

// Solves (T - shift) x = b for symmetric tridiagonal T by Gaussian
// elimination with partial pivoting.
VectorXd tridiagonal_solve(const VectorXd& d, const VectorXd& e, double shift, VectorXd b) {
  const Eigen::Index n = d.size();
  // Rows carry the diagonal, first and second superdiagonals after pivoting.
  VectorXd diag = d.array() - shift, up1(n), up2 = VectorXd::Zero(n), low(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    up1[i] = e[i];
    low[i] = e[i];
  }
  const double tiny = std::numeric_limits<double>::epsilon() * (d.cwiseAbs().maxCoeff() + 2 * e.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(low[i]) > std::abs(diag[i])) {
      std::swap(diag[i], low[i]);
      std::swap(up1[i], diag[i + 1]);
      if (i + 2 < n) std::swap(up2[i], up1[i + 1]);
      std::swap(b[i], b[i + 1]);
    }
    if (std::abs(diag[i]) < tiny) diag[i] = tiny;
    const double m = low[i] / diag[i];
    diag[i + 1] -= m * up1[i];
    if (i + 2 < n) up1[i + 1] -= m * up2[i];
    b[i + 1] -= m * b[i];
  }
  if (std::abs(diag[n - 1]) < tiny) diag[n - 1] = tiny;
  VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    if (i + 1 < n) s -= up1[i] * x[i + 1];
    if (i + 2 < n) s -= up2[i] * x[i + 2];
    x[i] = s / diag[i];
  }
  return x;
}

// Number of eigenvalues of T below x (Sturm sequence).
Eigen::Index sturm_count(const VectorXd& d, const VectorXd& e, double x) {
  Eigen::Index count = 0;
  double q = 1.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    if (q < 0.0) ++count;
  }
  return count;
}

// The k lowest eigenvalues of T by bisection on Gershgorin bounds.
VectorXd tridiagonal_lowest(const VectorXd& d, const VectorXd& e, int k) {
  const Eigen::Index n = d.size();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double floor = std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
  VectorXd w(k);
  for (int j = 0; j < k; ++j) {
    double a = j == 0 ? lo : w[j - 1] - floor, b = hi;
    while (b - a > 2 * floor) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (sturm_count(d, e, mid) > j ? b : a) = mid;
    }
    w[j] = 0.5 * (a + b);
  }
  return w;
}

// Inverse iteration for the given (ascending) eigenvalues; vectors whose
// eigenvalues sit in a numerical cluster are orthogonalized against each other.
MatrixXd tridiagonal_vectors(const VectorXd& d, const VectorXd& e, const VectorXd& w) {
  const Eigen::Index n = d.size();
  const double scale = d.cwiseAbs().maxCoeff() + 2 * e.cwiseAbs().maxCoeff();
  MatrixXd y(n, w.size());
  std::mt19937_64 rng(0x7d1a);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = normal(rng);
    for (int it = 0; it < 4; ++it) {
      x = tridiagonal_solve(d, e, w[j], x);
      for (Eigen::Index c = 0; c < j; ++c)
        if (std::abs(w[j] - w[c]) < 1e-3 * scale) x -= y.col(c).dot(x) * y.col(c);
      x.normalize();
    }
    y.col(j) = x;
  }
  return y;
}

Spectrum dense_eigs(const LinearizedOperator& op, int k) {
  const Grid& g = *op.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  // -Lap is circulant; its first column is the inverse transform of |k|^2.
  std::vector<cplx> col(g.k_squared().begin(), g.k_squared().end());
  fft_inverse(g, col);
  MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l) a(j, l) = col[static_cast<std::size_t>((j - l + n) % n)].real();
  for (Eigen::Index j = 0; j < n; ++j) a(j, j) += op.potential()[j];

  // Householder reduction, then the k lowest pairs of the tridiagonal form.
  Eigen::Tridiagonalization<MatrixXd> tri(a);
  const VectorXd d = tri.diagonal();
  const VectorXd e = tri.subDiagonal();
  const VectorXd w = tridiagonal_lowest(d, e, k);
  const MatrixXd y = tridiagonal_vectors(d, e, w);
  const MatrixXd z = tri.matrixQ() * y;

  Spectrum s;
  s.kind = op.kind();
  for (int i = 0; i < k; ++i) {
    s.eigenvalues.push_back(w[i]);
    s.eigenfunctions.push_back(normalized_mode(op.grid(), z.col(i)));
  }
  return s;
}

// Lowest eigenpair of the operator restricted to the complement of the
// locked vectors. Single-vector Lanczos sees one direction per eigenspace,
// so degenerate eigenvalues are recovered one at a time by deflation.
struct RitzPair {
  double lambda;
  VectorXd vec;
  double residual;
};

RitzPair lanczos_lowest(const std::function<VectorXd(const VectorXd&)>& matvec, const MatrixXd& locked,
                        VectorXd start, const std::function<double(const VectorXd&, double)>& resid,
                        double tol) {
  const Eigen::Index n = start.size();
  auto deflate = [&](VectorXd& x) {
    if (locked.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) x -= locked * (locked.transpose() * x);
  };
  deflate(start);
  start.normalize();
  const Eigen::Index room = n - locked.cols();
  for (Eigen::Index m = std::min<Eigen::Index>(room, 200);; m = std::min<Eigen::Index>(room, 2 * m)) {
    MatrixXd basis(n, m);
    VectorXd alpha(m), beta(m);
    basis.col(0) = start;
    Eigen::Index built = m;
    for (Eigen::Index j = 0; j < m; ++j) {
      VectorXd w = matvec(basis.col(j));
      deflate(w);
      alpha[j] = basis.col(j).dot(w);
      // Full reorthogonalization, applied twice.
      for (int pass = 0; pass < 2; ++pass)
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      deflate(w);
      beta[j] = w.norm();
      if (j + 1 == m) break;
      if (beta[j] < 1e-12) {
        built = j + 1;
        break;
      }
      basis.col(j + 1) = w / beta[j];
    }

    Eigen::SelfAdjointEigenSolver<MatrixXd> tri;
    VectorXd diag = alpha.head(built);
    VectorXd sub = beta.head(std::max<Eigen::Index>(built - 1, 0));
    tri.computeFromTridiagonal(diag, sub);
    require(tri.info() == Eigen::Success, "tridiagonal eigensolver failed", ErrorKind::solver);
    RitzPair out{tri.eigenvalues()[0], basis.leftCols(built) * tri.eigenvectors().col(0), 0.0};
    out.vec.normalize();
    out.residual = resid(out.vec, out.lambda);
    if (out.residual < tol) return out;
    if (m == room || built < m)
      throw Error(ErrorKind::solver, "Lanczos eigensolver did not reach residual tolerance");
  }
}

Spectrum lanczos_eigs(const LinearizedOperator& op, int k, double tol) {
  const auto n = static_cast<Eigen::Index>(op.grid()->size());
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;

  auto matvec = [&](const VectorXd& x) {
    const auto y = op.apply(std::span<const double>(x.data(), static_cast<std::size_t>(n)));
    return VectorXd(Eigen::Map<const VectorXd>(y.data(), n));
  };
  auto resid = [&](const VectorXd& x, double lambda) {
    return mode_residual(op, normalized_mode(op.grid(), x), lambda);
  };

  MatrixXd locked(n, 0);
  std::vector<double> values;
  for (int i = 0; i < k; ++i) {
    VectorXd start(n);
    for (Eigen::Index j = 0; j < n; ++j) start[j] = normal(rng);
    RitzPair p = lanczos_lowest(matvec, locked, start, resid, tol);
    locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
    locked.col(locked.cols() - 1) = p.vec;
    values.push_back(p.lambda);
  }

  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  Spectrum s;
  s.kind = op.kind();
  for (int i : order) {
    Field xi = normalized_mode(op.grid(), locked.col(i));
    s.residuals.push_back(mode_residual(op, xi, values[i]));
    s.eigenvalues.push_back(values[i]);
    s.eigenfunctions.push_back(std::move(xi));
  }
  return s;
}

}  // namespace

Spectrum lowest_eigs(const LinearizedOperator& op, int k, double tol) {
  require(k >= 1, "need at least one eigenpair");
  require(static_cast<std::size_t>(k) <= op.grid()->size(), "more eigenpairs than grid points");
  Spectrum s = op.grid()->dim() == 1 ? dense_eigs(op, k) : lanczos_eigs(op, k, tol);
  if (s.residuals.empty()) {
    for (int i = 0; i < k; ++i) {
      s.residuals.push_back(mode_residual(op, s.eigenfunctions[i], s.eigenvalues[i]));
    }
  }
  for (double r : s.residuals)
    require(r < tol, "eigenpair residual above tolerance", ErrorKind::solver);
  return s;
}

NonpositiveCount count_nonpositive(std::span<const Spectrum> spectra, double zero_tol) {
  require(zero_tol >= 0.0, "zero tolerance must be non-negative");
  constexpr double kNearZero = 1e-6;
  NonpositiveCount out;
  for (const auto& s : spectra) {
    require(!s.eigenvalues.empty() && s.eigenvalues.back() >= zero_tol,
            "spectrum window too small: no positive eigenvalue computed", ErrorKind::solver);
    for (double lambda : s.eigenvalues) {
      if (lambda < zero_tol) ++out.nu0;
      if (std::abs(lambda) < kNearZero && std::abs(lambda) >= zero_tol) out.unstable = true;
    }
  }
  return out;
}

Field boosted_eigenfunction(const Field& xi, const SolitonParams& params, double t,
                            const GridPtr& grid) {
  return boost_transform(xi, params, t, grid);
}

SpectralReport spectral_report(const Profile& profile, int k, double tol, double zero_tol) {
  auto [lp, lm] = build_operators(profile);
  SpectralReport r;
  r.plus = lowest_eigs(lp, k, tol);
  r.minus = lowest_eigs(lm, k, tol);
  const std::array<Spectrum, 2> both{r.plus, r.minus};
  const auto count = count_nonpositive(both, zero_tol);
  r.nu0 = count.nu0;
  r.nu0_unstable = count.unstable;
  r.zero_tol = zero_tol;
  r.eig_tol = tol;
  return r;
}

std::vector<Field> projection_family(const SpectralReport& report, const SolitonParams& params,
                                     double t, const GridPtr& grid) {
  std::vector<Field> out;
  for (std::size_t i = 0; i < report.plus.eigenvalues.size(); ++i)
    if (report.plus.eigenvalues[i] < report.zero_tol)
      out.push_back(boosted_eigenfunction(report.plus.eigenfunctions[i], params, t, grid));
  for (std::size_t i = 0; i < report.minus.eigenvalues.size(); ++i)
    if (report.minus.eigenvalues[i] < report.zero_tol)
      out.push_back(cplx{0.0, 1.0} *
                    boosted_eigenfunction(report.minus.eigenfunctions[i], params, t, grid));
  return out;
}

Field random_smooth_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<cplx> c(grid->size(), cplx{0.0, 0.0});
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const auto ii = grid->unravel(idx);
    bool keep = true;
    for (int a = 0; a < grid->dim(); ++a) {
      const int n = grid->points(a);
      const int m = ii[a] <= n / 2 ? ii[a] : n - ii[a];
      keep = keep && 8 * m < n;
    }
    // Draw for every mode so the stream does not depend on the band.
    const cplx z{normal(rng), normal(rng)};
    if (keep) c[idx] = z;
  }
  Field f = from_spectrum(grid, std::move(c));
  f *= 1.0 / norm_l2(f);
  return f;
}

namespace {

// Gram-Schmidt in the real inner product Re <f, g>.
std::vector<Field> orthonormalize(const std::vector<Field>& family) {
  std::vector<Field> basis;
  for (const auto& f : family) {
    Field g = f;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) g -= cplx{inner_real(g, b), 0.0} * b;
    const double nrm = std::sqrt(inner_real(g, g));
    if (nrm > 1e-10 * std::sqrt(inner_real(f, f))) {
      g *= 1.0 / nrm;
      basis.push_back(std::move(g));
    }
  }
  return basis;
}

Field project_out(Field e, const std::vector<Field>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) e -= cplx{inner_real(e, b), 0.0} * b;
  return e;
}

struct ComponentSetup {
  Field base;
  std::vector<Field> raw;    // boosted normalized eigenfunctions
  std::vector<Field> basis;  // orthonormalized span of raw
  const SolitonParams* params;
};

ComponentSetup setup_component(const Profile& profile, const SolitonParams& params,
                               const SpectralReport& report, const GridPtr& grid, double t) {
  ComponentSetup c{soliton_field(params, profile, t, grid), projection_family(report, params, t, grid),
                   {}, &params};
  c.basis = orthonormalize(c.raw);
  return c;
}

double hessian(const ComponentSetup& c, const Field& e) {
  return linearized_action(c.base, e, c.params->mu, c.params->omega, c.params->v);
}

double projection_sq(const ComponentSetup& c, const Field& e) {
  double s = 0.0;
  for (const auto& x : c.raw) {
    const double p = inner_real(e, x);
    s += p * p;
  }
  return s;
}

}  // namespace

CoercivityResult coercivity_estimate(const Profile& profile, const SolitonParams& params,
                                     const SpectralReport& report, double t, int trials,
                                     std::uint64_t seed) {
  require(trials >= 1, "coercivity estimate needs at least one trial");
  const GridPtr grid = profile.field.grid_ptr();
  const auto comp = setup_component(profile, params, report, grid, t);
  std::mt19937_64 rng(seed);

  CoercivityResult out;
  out.c0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const Field raw = random_smooth_field(grid, rng);
    const Field e = project_out(raw, comp.basis);
    if (norm_l2(e) < 1e-8 * norm_l2(raw)) {
      ++out.skipped;
      continue;
    }
    const double h1 = norm_h1(e);
    out.c0 = std::min(out.c0, hessian(comp, e) / (h1 * h1));
    ++out.trials_used;
  }
  out.positive = out.trials_used > 0 && out.c0 > 0.0;

  for (int i = 0; i < trials; ++i) {
    const Field e = random_smooth_field(grid, rng);
    const double h1 = norm_h1(e);
    ++out.fresh_checked;
    if (out.c0 * h1 * h1 > hessian(comp, e) + projection_sq(comp, e)) ++out.fresh_violations;
  }
  return out;
}

CoercivityResult vector_coercivity_estimate(const SolitonFamily& family,
                                            const std::array<SpectralReport, 2>& reports,
                                            const GridPtr& grid, double t, int trials,
                                            std::uint64_t seed) {
  require(trials >= 1, "coercivity estimate needs at least one trial");
  const auto c1 = setup_component(family.profiles[0], family.params[0], reports[0], grid, t);
  const auto c2 = setup_component(family.profiles[1], family.params[1], reports[1], grid, t);
  std::mt19937_64 rng(seed);

  CoercivityResult out;
  out.c0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const Field r1 = random_smooth_field(grid, rng);
    const Field r2 = random_smooth_field(grid, rng);
    const Field e1 = project_out(r1, c1.basis);
    const Field e2 = project_out(r2, c2.basis);
    const double n1 = norm_h1(e1);
    const double n2 = norm_h1(e2);
    if (n1 * n1 + n2 * n2 < 1e-16) {
      ++out.skipped;
      continue;
    }
    out.c0 = std::min(out.c0, (hessian(c1, e1) + hessian(c2, e2)) / (n1 * n1 + n2 * n2));
    ++out.trials_used;
  }
  out.positive = out.trials_used > 0 && out.c0 > 0.0;

  for (int i = 0; i < trials; ++i) {
    const Field e1 = random_smooth_field(grid, rng);
    const Field e2 = random_smooth_field(grid, rng);
    const double n1 = norm_h1(e1);
    const double n2 = norm_h1(e2);
    ++out.fresh_checked;
    const double rhs = hessian(c1, e1) + hessian(c2, e2) + projection_sq(c1, e1) + projection_sq(c2, e2);
    if (out.c0 * (n1 * n1 + n2 * n2) > rhs) ++out.fresh_violations;
  }
  return out;
}

void write_spectral_report(const std::filesystem::path& dir, const std::string& prefix,
                           const SpectralReport& report) {
  nlohmann::json j;
  j["eigenvalues_plus"] = report.plus.eigenvalues;
  j["eigenvalues_minus"] = report.minus.eigenvalues;
  j["residuals_plus"] = report.plus.residuals;
  j["residuals_minus"] = report.minus.residuals;
  j["nu0"] = report.nu0;
  j["nu0_unstable"] = report.nu0_unstable;
  j["coercivity_estimate"] = report.coercivity_estimate;
  j["coercivity_positive"] = report.coercivity_positive;
  j["zero_tol"] = report.zero_tol;
  j["eig_tol"] = report.eig_tol;
  std::vector<std::string> files;
  auto dump_modes = [&](const Spectrum& s, const std::string& tag) {
    for (std::size_t i = 0; i < s.eigenfunctions.size(); ++i) {
      const std::string name = prefix + "_" + tag + "_" + std::to_string(i) + ".bin";
      write_field(dir / name, s.eigenfunctions[i]);
      files.push_back(name);
    }
  };
  dump_modes(report.plus, "plus");
  dump_modes(report.minus, "minus");
  j["eigenfunction_files"] = files;
  std::ofstream out(dir / (prefix + ".json"));
  require(static_cast<bool>(out), "cannot write spectral report", ErrorKind::io);
  out << j.dump(2) << '\n';
}

}  // namespace cnls
