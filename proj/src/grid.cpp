#include "cnls/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cnls/error.hpp"

namespace cnls {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int dim, std::vector<int> n, std::vector<double> length)
    : dim_(dim), n_(std::move(n)), length_(std::move(length)) {
  require(dim_ >= 1 && dim_ <= 3, "grid dimension must be 1, 2 or 3");
  require(static_cast<int>(n_.size()) == dim_ && static_cast<int>(length_.size()) == dim_,
          "grid: need one point count and one length per axis");
  for (int a = 0; a < dim_; ++a) {
    require(is_power_of_two(n_[a]) && n_[a] >= 8,
            "grid: points per axis must be a power of two >= 8, got " + std::to_string(n_[a]));
    require(std::isfinite(length_[a]) && length_[a] > 0.0, "grid: box length must be positive");
  }

  spacing_.resize(dim_);
  k_.resize(dim_);
  for (int a = 0; a < dim_; ++a) {
    spacing_[a] = length_[a] / n_[a];
    cell_volume_ *= spacing_[a];
    size_ *= static_cast<std::size_t>(n_[a]);
    const double dk = 2.0 * std::numbers::pi / length_[a];
    k_[a].resize(n_[a]);
    for (int i = 0; i < n_[a]; ++i) {
      const int m = (i <= n_[a] / 2) ? i : i - n_[a];
      k_[a][i] = dk * m;
    }
  }

  k2_.assign(size_, 0.0);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    const auto ii = unravel(idx);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += k_[a][ii[a]] * k_[a][ii[a]];
    k2_[idx] = s;
  }
}

std::array<int, 3> Grid::unravel(std::size_t flat) const {
  std::array<int, 3> ii{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    ii[a] = static_cast<int>(flat % n_[a]);
    flat /= n_[a];
  }
  return ii;
}

std::array<double, 3> Grid::point(std::size_t flat) const {
  const auto ii = unravel(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(a, ii[a]);
  return x;
}

GridPtr make_grid(int dim, std::vector<int> n, std::vector<double> length) {
  require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
  if (n.size() == 1 && dim > 1) n.assign(dim, n[0]);
  if (length.size() == 1 && dim > 1) length.assign(dim, length[0]);
  return std::make_shared<const Grid>(dim, std::move(n), std::move(length));
}

GridPtr make_grid(int dim, int n, double length) {
  return make_grid(dim, std::vector<int>{n}, std::vector<double>{length});
}

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  require(grid_ != nullptr, "field needs a grid");
  values_.assign(grid_->size(), cplx{0.0, 0.0});
}

Field::Field(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, "field needs a grid");
  require(values_.size() == grid_->size(), "field: value count does not match grid");
}

bool Field::all_finite() const noexcept {
  for (const auto& z : values_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

Field& Field::operator+=(const Field& other) {
  require(same_grid(other), "field arithmetic on mismatched grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require(same_grid(other), "field arithmetic on mismatched grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(cplx scale) {
  for (auto& z : values_) z *= scale;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }

FieldPair::FieldPair(Field a, Field b) : first(std::move(a)), second(std::move(b)) {
  require(first.same_grid(second), "field pair components live on different grids");
}

FieldPair operator-(const FieldPair& a, const FieldPair& b) {
  return FieldPair(a.first - b.first, a.second - b.second);
}

}  // namespace cnls
