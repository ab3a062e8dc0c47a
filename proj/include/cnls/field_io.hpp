#pragma once

#include <filesystem>

#include "cnls/grid.hpp"

namespace cnls {

// Binary field container, all entries little-endian IEEE-754 doubles:
//   dim, n[0..dim), length[0..dim), then (re, im) per point in row-major order.
void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

/// 1D fields only: header "x,re,im,abs", one row per grid point.
void write_field_csv(const std::filesystem::path& path, const Field& f);

}  // namespace cnls
