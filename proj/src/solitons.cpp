#include "cnls/solitons.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cnls/error.hpp"
#include "cnls/spectral.hpp"

namespace cnls {

void SolitonParams::validate(int dim) const {
  require(std::isfinite(omega) && omega > 0.0, "soliton frequency omega must be positive");
  require(std::isfinite(mu) && mu > 0.0, "soliton coefficient mu must be positive");
  require(std::isfinite(gamma), "soliton phase must be finite");
  require(static_cast<int>(x0.size()) == dim && static_cast<int>(v.size()) == dim,
          "soliton centre and velocity must have one entry per grid axis");
}

std::vector<double> SolitonParams::center(double t) const {
  std::vector<double> c(x0.size());
  for (std::size_t a = 0; a < c.size(); ++a) c[a] = x0[a] + v[a] * t;
  return c;
}

double SolitonFamily::v_star() const {
  double s = 0.0;
  for (std::size_t a = 0; a < params[0].v.size(); ++a) {
    const double d = params[0].v[a] - params[1].v[a];
    s += d * d;
  }
  return std::sqrt(s);
}

double SolitonFamily::omega_star() const {
  return 0.25 * std::min(params[0].omega, params[1].omega);
}

double SolitonFamily::rate() const { return std::sqrt(omega_star()) * v_star(); }

namespace {

double wrap(double z, double length) { return z - length * std::round(z / length); }

// Periodic band-limited interpolation kernel for an even number of samples,
// with the Nyquist mode split as a cosine.
double dirichlet(double theta, int n, double length) {
  const double a = std::numbers::pi * theta / length;
  const double t = std::tan(a);
  if (std::abs(t) < 1e-14) return 1.0;
  return std::sin(n * a) / (n * t);
}

// Evaluates the trigonometric interpolant of `shape` at the points
// sqrt(omega) * y of the target grid, axis by axis. Points outside the
// shape's own box evaluate to zero.
std::vector<cplx> resample(const Field& shape, const Grid& target, double scale) {
  const Grid& src = shape.grid();
  const int dim = src.dim();
  std::vector<int> dims = src.points();
  std::vector<cplx> cur = shape.data();

  for (int axis = 0; axis < dim; ++axis) {
    const int n_in = dims[axis];
    const int n_out = target.points(axis);
    std::size_t inner = 1;
    for (int b = axis + 1; b < dim; ++b) inner *= dims[b];
    std::size_t outer = 1;
    for (int b = 0; b < axis; ++b) outer *= dims[b];

    std::vector<cplx> next(outer * n_out * inner, cplx{0.0, 0.0});
    std::vector<double> w(n_in);
    const double half = 0.5 * src.length(axis);
    for (int j = 0; j < n_out; ++j) {
      const double s = scale * target.coordinate(axis, j);
      if (s < -half - 1e-12 || s > half) continue;
      for (int l = 0; l < n_in; ++l)
        w[l] = dirichlet(s - src.coordinate(axis, l), n_in, src.length(axis));
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
          cplx acc{0.0, 0.0};
          const std::size_t base = o * n_in * inner + i;
          for (int l = 0; l < n_in; ++l) acc += w[l] * cur[base + l * inner];
          next[(o * n_out + j) * inner + i] = acc;
        }
      }
    }
    dims[axis] = n_out;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

BoostedShape::BoostedShape(const Field& shape, SolitonParams params, GridPtr grid, bool check_tail)
    : params_(std::move(params)), grid_(std::move(grid)), envelope_(grid_) {
  params_.validate(grid_->dim());
  require(shape.grid().dim() == grid_->dim(), "profile and target grid differ in dimension");

  const double amplitude = std::sqrt(params_.omega / params_.mu);
  if (params_.omega == 1.0 && shape.grid() == *grid_) {
    envelope_ = Field(grid_, shape.data());
  } else {
    envelope_ = Field(grid_, resample(shape, *grid_, std::sqrt(params_.omega)));
  }
  envelope_ *= amplitude;

  if (check_tail) {
    double peak = 0.0;
    double edge = 0.0;
    for (std::size_t i = 0; i < envelope_.size(); ++i) {
      const double m = std::abs(envelope_[i]);
      peak = std::max(peak, m);
      const auto ii = grid_->unravel(i);
      for (int a = 0; a < grid_->dim(); ++a)
        if (ii[a] == 0) edge = std::max(edge, m);
    }
    require(edge <= kSolitonTailTolerance * peak,
            "box too small: scaled soliton profile wraps onto itself through the boundary");
  }
}

Field BoostedShape::at(double t) const {
  const auto c = params_.center(t);
  const bool moved = std::any_of(c.begin(), c.end(), [](double z) { return z != 0.0; });
  Field f = moved ? fourier_shift(envelope_, c) : envelope_;

  const Grid& g = *grid_;
  double v2 = 0.0;
  for (double va : params_.v) v2 += va * va;
  const double base = params_.omega * t - 0.25 * v2 * t + params_.gamma;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.point(i);
    double theta = base;
    for (int a = 0; a < g.dim(); ++a) {
      // Evaluate the Galilean phase at the periodic image nearest the centre.
      const double y = wrap(x[a] - c[a], g.length(a));
      theta += 0.5 * params_.v[a] * (c[a] + y);
    }
    f[i] *= std::polar(1.0, theta);
  }
  return f;
}

Field soliton_field(const SolitonParams& params, const Profile& profile, double t,
                    const GridPtr& grid) {
  return BoostedShape(profile.field, params, grid).at(t);
}

Field boost_transform(const Field& shape, const SolitonParams& params, double t,
                      const GridPtr& grid) {
  return BoostedShape(shape, params, grid, false).at(t);
}

void check_seam(const SolitonFamily& family, double t, const Grid& grid) {
  const auto c1 = family.params[0].center(t);
  const auto c2 = family.params[1].center(t);
  const double width =
      kSeamWidth / std::sqrt(std::min(family.params[0].omega, family.params[1].omega));
  for (int a = 0; a < grid.dim(); ++a) {
    const double direct = std::abs(c1[a] - c2[a]);
    require(grid.length(a) - direct >= width,
            "box too small: solitary waves approach each other through the periodic boundary");
  }
}

SolitonPair::SolitonPair(const SolitonFamily& family, GridPtr grid)
    : family_(family),
      grid_(std::move(grid)),
      first_(family.profiles[0].field, family.params[0], grid_),
      second_(family.profiles[1].field, family.params[1], grid_) {}

FieldPair SolitonPair::at(double t) const {
  check_seam(family_, t, *grid_);
  return FieldPair(first_.at(t), second_.at(t));
}

FieldPair pair_solitons(const SolitonFamily& family, double t, const GridPtr& grid) {
  return SolitonPair(family, grid).at(t);
}

}  // namespace cnls
