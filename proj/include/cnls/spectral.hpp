#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cnls/grid.hpp"

namespace cnls {

/// In-place unnormalized forward DFT (e^{-ikx} kernel) over the whole grid.
void fft_forward(const Grid& grid, std::span<cplx> data);
/// In-place inverse DFT including the 1/N factor.
void fft_inverse(const Grid& grid, std::span<cplx> data);

/// Forward transform, multiplication by m and inverse transform, all carried
/// out in long double; the result is rounded back to double once.
void fourier_multiply_extended(const Grid& grid, std::span<cplx> data,
                               std::span<const std::complex<long double>> m);

std::vector<cplx> spectrum(const Field& f);
Field from_spectrum(GridPtr grid, std::vector<cplx> coeffs);

/// Exact derivative of the trigonometric interpolant along each axis.
/// The Nyquist mode of the differentiated axis is dropped.
std::vector<Field> spectral_gradient(const Field& f);
Field partial_derivative(const Field& f, int axis);
Field laplacian(const Field& f);

/// Samples of f(x - offset), exact for the trigonometric interpolant.
Field fourier_shift(const Field& f, std::span<const double> offset);

/// Zero every mode with |m| > n/3 on any axis (2/3 rule).
void dealias_mask(const Grid& grid, std::span<cplx> coeffs);

enum class PairNorm { l2, h1 };

double norm_l2(const Field& f);
double norm_lp(const Field& f, int p);
double norm_linf(const Field& f);
double norm_h1(const Field& f);
double pair_norm(const FieldPair& p, PairNorm kind);

/// Complex L^2 inner product  sum f conj(g) dV.
cplx inner(const Field& f, const Field& g);
/// Real L^2 inner product  Re sum f conj(g) dV.
double inner_real(const Field& f, const Field& g);

/// Rectangle-rule integral of a real density sampled on the grid.
double integrate(const Grid& grid, std::span<const double> density);

}  // namespace cnls
