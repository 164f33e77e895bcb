#pragma once

// Data-parallel inner loops. Every kernel exists twice: the OpenMP version in
// fluidspan::kernels (used by the library) and a plain loop in
// fluidspan::kernels::serial kept as the reference the tests and the benchmark
// compare against. Reductions use a fixed static partition and combine the
// partial results in thread order, so a fixed thread count gives bitwise
// reproducible results.

#include <complex>
#include <cstddef>
#include <span>

namespace fluidspan::kernels {

using cplx = std::complex<double>;

/// Threads used by the parallel kernels. Initialized from FLUIDSPAN_THREADS
/// (capped by the OpenMP default) on first use.
int thread_count();
void set_thread_count(int n);

#define FLUIDSPAN_KERNEL_DECLS                                                                     \
  void lincomb(std::span<double> out, double a, std::span<const double> x, double b,              \
               std::span<const double> y);                                                         \
  void lincomb(std::span<cplx> out, double a, std::span<const cplx> x, double b,                  \
               std::span<const cplx> y);                                                           \
  void multiply(std::span<double> out, std::span<const double> a, std::span<const double> b);     \
  /* out = a1*b1 + s*a2*b2 */                                                                      \
  void dot2(std::span<double> out, std::span<const double> a1, std::span<const double> b1,        \
            std::span<const double> a2, std::span<const double> b2, double s);                     \
  double sum(std::span<const double> a);                                                           \
  double sum_product(std::span<const double> a, std::span<const double> b);                        \
  double sum_abs_pow(std::span<const double> a, double p);                                         \
  double max_abs(std::span<const double> a);                                                       \
  /* sup over points of |(a, b)| */                                                                \
  double max_hypot(std::span<const double> a, std::span<const double> b);                          \
  /* sup over points of the spectral norm of [[a11, a12], [a21, a22]] */                           \
  double max_opnorm2x2(std::span<const double> a11, std::span<const double> a12,                   \
                       std::span<const double> a21, std::span<const double> a22);                  \
  /* multiply an r2c spectrum (ny rows of nx/2+1) by (i kx)^ax (i ky)^ay */                        \
  void spectral_derivative(std::span<const cplx> in, std::span<cplx> out, int nx, int ny, int ax,  \
                           int ay);                                                                \
  /* divide by -|k|^2, zero mean mode */                                                           \
  void spectral_inverse_laplacian(std::span<const cplx> in, std::span<cplx> out, int nx, int ny);  \
  /* zero modes with |kx| > kcx or |ky| > kcy */                                                   \
  void spectral_truncate(std::span<cplx> spec, int nx, int ny, int kcx, int kcy);                  \
  /* periodic tensor-product cubic Lagrange interpolation of several fields at scattered points */ \
  void interpolate_cubic(int nx, int ny, std::span<const double* const> fields,                    \
                         std::span<const double> xs, std::span<const double> ys,                   \
                         std::span<double* const> outs);

FLUIDSPAN_KERNEL_DECLS

namespace serial {
FLUIDSPAN_KERNEL_DECLS
}  // namespace serial

#undef FLUIDSPAN_KERNEL_DECLS

}  // namespace fluidspan::kernels
