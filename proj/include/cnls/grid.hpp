#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cnls {

using cplx = std::complex<double>;

/// Periodic box [-L/2, L/2)^d sampled uniformly, with the FFT wavenumber
/// table of each axis. Points are stored row-major (axis 0 slowest).
class Grid {
 public:
  Grid(int dim, std::vector<int> n, std::vector<double> length);

  int dim() const noexcept { return dim_; }
  int points(int axis) const { return n_.at(axis); }
  double length(int axis) const { return length_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  const std::vector<int>& points() const noexcept { return n_; }
  const std::vector<double>& lengths() const noexcept { return length_; }

  /// k_m = 2*pi*m/L in FFT order; index n/2 holds the Nyquist mode (+n/2).
  const std::vector<double>& wavenumbers(int axis) const { return k_.at(axis); }
  bool is_nyquist(int axis, int index) const { return index == n_.at(axis) / 2; }

  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }

  double coordinate(int axis, int index) const {
    return -0.5 * length_[axis] + index * spacing_[axis];
  }
  std::array<int, 3> unravel(std::size_t flat) const;
  std::array<double, 3> point(std::size_t flat) const;

  /// |k|^2 per flattened index, in FFT order.
  const std::vector<double>& k_squared() const noexcept { return k2_; }

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

 private:
  int dim_;
  std::vector<int> n_;
  std::vector<double> length_;
  std::vector<double> spacing_;
  std::vector<std::vector<double>> k_;
  std::vector<double> k2_;
  std::size_t size_ = 1;
  double cell_volume_ = 1.0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Validating factory: dim in {1,2,3}, every n a power of two >= 8, every
/// length > 0. Scalar n/length are broadcast to all axes.
GridPtr make_grid(int dim, std::vector<int> n, std::vector<double> length);
GridPtr make_grid(int dim, int n, double length);

/// Complex samples of a function on a grid.
class Field {
 public:
  /// Empty placeholder without a grid.
  Field() = default;
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<cplx> values);

  template <typename Fn>
  static Field from_function(GridPtr grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f.values_[i] = fn(grid->point(i));
    return f;
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::vector<cplx>& data() noexcept { return values_; }
  const std::vector<cplx>& data() const noexcept { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  bool all_finite() const noexcept;
  bool same_grid(const Field& other) const {
    return grid_ == other.grid_ || (grid_ && other.grid_ && *grid_ == *other.grid_);
  }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(cplx scale);

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);

/// Two components (u1, u2) sharing one grid.
struct FieldPair {
  FieldPair(Field a, Field b);

  const Grid& grid() const noexcept { return first.grid(); }
  bool all_finite() const noexcept { return first.all_finite() && second.all_finite(); }
  bool same_grid(const FieldPair& other) const { return first.same_grid(other.first); }

  Field first;
  Field second;
};

FieldPair operator-(const FieldPair& a, const FieldPair& b);

}  // namespace cnls
