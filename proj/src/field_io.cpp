#include "cnls/field_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <vector>

#include "cnls/error.hpp"

namespace cnls {

static_assert(std::endian::native == std::endian::little,
              "field container is written in host order; big-endian hosts unsupported");

namespace {

void put(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

double get(std::ifstream& in, const std::filesystem::path& path) {
  double v = 0.0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(in), "truncated field file: " + path.string(), ErrorKind::io);
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open for writing: " + path.string(), ErrorKind::io);
  const Grid& g = f.grid();
  put(out, g.dim());
  for (int a = 0; a < g.dim(); ++a) put(out, g.points(a));
  for (int a = 0; a < g.dim(); ++a) put(out, g.length(a));
  for (const auto& z : f.values()) {
    put(out, z.real());
    put(out, z.imag());
  }
  require(static_cast<bool>(out), "write failed: " + path.string(), ErrorKind::io);
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open field file: " + path.string(), ErrorKind::io);
  const double dim_d = get(in, path);
  require(dim_d == 1.0 || dim_d == 2.0 || dim_d == 3.0, "bad dimension in field header",
          ErrorKind::io);
  const int dim = static_cast<int>(dim_d);
  std::vector<int> n(dim);
  std::vector<double> length(dim);
  for (int a = 0; a < dim; ++a) {
    const double v = get(in, path);
    require(v >= 1.0 && v == std::floor(v) && v < 1 << 24, "bad point count in field header",
            ErrorKind::io);
    n[a] = static_cast<int>(v);
  }
  for (int a = 0; a < dim; ++a) length[a] = get(in, path);
  GridPtr grid;
  try {
    grid = make_grid(dim, n, length);
  } catch (const Error& e) {
    throw Error(ErrorKind::io, std::string("field header describes an invalid grid: ") + e.what());
  }
  std::vector<cplx> values(grid->size());
  for (auto& z : values) {
    const double re = get(in, path);
    const double im = get(in, path);
    z = {re, im};
  }
  return Field(grid, std::move(values));
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  require(f.grid().dim() == 1, "CSV export is for 1D fields");
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open for writing: " + path.string(), ErrorKind::io);
  out << "x,re,im,abs\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << f.grid().coordinate(0, static_cast<int>(i)) << ',' << f[i].real() << ',' << f[i].imag()
        << ',' << std::abs(f[i]) << '\n';
  }
}

}  // namespace cnls
