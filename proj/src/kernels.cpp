#include "fluidspan/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace fluidspan::kernels {

namespace {

std::atomic<int> g_threads{0};

int resolve_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("FLUIDSPAN_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap > 0) n = std::min(n, cap);
    } catch (...) {
    }
  }
  return std::max(n, 1);
}

int threads_for(bool parallel) { return parallel ? thread_count() : 1; }

// Static partition of [0, n) into `parts` contiguous chunks.
inline std::size_t chunk_begin(std::size_t n, int parts, int k) {
  return n * static_cast<std::size_t>(k) / static_cast<std::size_t>(parts);
}

template <class Body>
void for_each_index(bool parallel, std::size_t n, Body body) {
  const int nt = threads_for(parallel);
  if (nt == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) body(static_cast<std::size_t>(i));
}

// Deterministic reduction: per-chunk partials combined in chunk order.
template <class T, class Body, class Combine>
T reduce(bool parallel, std::size_t n, T init, Body body, Combine combine) {
  const int nt = threads_for(parallel);
  if (nt == 1) {
    T acc = init;
    for (std::size_t i = 0; i < n; ++i) acc = combine(acc, body(i));
    return acc;
  }
  std::vector<T> partial(static_cast<std::size_t>(nt), init);
#pragma omp parallel num_threads(nt)
  {
    const int k = omp_get_thread_num();
    T acc = init;
    for (std::size_t i = chunk_begin(n, nt, k); i < chunk_begin(n, nt, k + 1); ++i) acc = combine(acc, body(i));
    partial[static_cast<std::size_t>(k)] = acc;
  }
  T acc = init;
  for (const T& v : partial) acc = combine(acc, v);
  return acc;
}

inline int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

inline cplx ipow(int order) {
  switch (order & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

struct Impl {
  bool parallel;

  void lincomb(std::span<double> out, double a, std::span<const double> x, double b,
               std::span<const double> y) const {
    for_each_index(parallel, out.size(), [&](std::size_t i) { out[i] = a * x[i] + b * y[i]; });
  }
  void lincomb(std::span<cplx> out, double a, std::span<const cplx> x, double b, std::span<const cplx> y) const {
    for_each_index(parallel, out.size(), [&](std::size_t i) { out[i] = a * x[i] + b * y[i]; });
  }
  void multiply(std::span<double> out, std::span<const double> a, std::span<const double> b) const {
    for_each_index(parallel, out.size(), [&](std::size_t i) { out[i] = a[i] * b[i]; });
  }
  void dot2(std::span<double> out, std::span<const double> a1, std::span<const double> b1,
            std::span<const double> a2, std::span<const double> b2, double s) const {
    for_each_index(parallel, out.size(), [&](std::size_t i) { out[i] = a1[i] * b1[i] + s * (a2[i] * b2[i]); });
  }
  double sum(std::span<const double> a) const {
    return reduce(parallel, a.size(), 0.0, [&](std::size_t i) { return a[i]; }, std::plus<double>{});
  }
  double sum_product(std::span<const double> a, std::span<const double> b) const {
    return reduce(parallel, a.size(), 0.0, [&](std::size_t i) { return a[i] * b[i]; }, std::plus<double>{});
  }
  double sum_abs_pow(std::span<const double> a, double p) const {
    if (p == 2.0)
      return reduce(parallel, a.size(), 0.0, [&](std::size_t i) { return a[i] * a[i]; }, std::plus<double>{});
    if (p == 4.0)
      return reduce(
          parallel, a.size(), 0.0,
          [&](std::size_t i) {
            const double s = a[i] * a[i];
            return s * s;
          },
          std::plus<double>{});
    return reduce(
        parallel, a.size(), 0.0, [&](std::size_t i) { return std::pow(std::abs(a[i]), p); }, std::plus<double>{});
  }
  double max_abs(std::span<const double> a) const {
    return reduce(
        parallel, a.size(), 0.0, [&](std::size_t i) { return std::abs(a[i]); },
        [](double u, double v) { return std::max(u, v); });
  }
  double max_hypot(std::span<const double> a, std::span<const double> b) const {
    return reduce(
        parallel, a.size(), 0.0, [&](std::size_t i) { return std::hypot(a[i], b[i]); },
        [](double u, double v) { return std::max(u, v); });
  }
  double max_opnorm2x2(std::span<const double> a11, std::span<const double> a12, std::span<const double> a21,
                       std::span<const double> a22) const {
    return reduce(
        parallel, a11.size(), 0.0,
        [&](std::size_t i) {
          // Largest singular value of a 2x2 matrix in closed form.
          const double f = a11[i] * a11[i] + a12[i] * a12[i] + a21[i] * a21[i] + a22[i] * a22[i];
          const double d = a11[i] * a22[i] - a12[i] * a21[i];
          const double disc = std::max(f * f - 4.0 * d * d, 0.0);
          return std::sqrt(0.5 * (f + std::sqrt(disc)));
        },
        [](double u, double v) { return std::max(u, v); });
  }
  void spectral_derivative(std::span<const cplx> in, std::span<cplx> out, int nx, int ny, int ax, int ay) const {
    const int nk = nx / 2 + 1;
    const cplx phase = ipow(ax + ay);
    for_each_index(parallel, static_cast<std::size_t>(ny), [&](std::size_t jj) {
      const int j = static_cast<int>(jj);
      const int ky = wavenumber(j, ny);
      // Odd derivatives of a Nyquist mode have no real representative.
      const double fy = ((ay & 1) && 2 * j == ny) ? 0.0 : std::pow(static_cast<double>(ky), ay);
      for (int i = 0; i < nk; ++i) {
        const double fx = ((ax & 1) && 2 * i == nx) ? 0.0 : std::pow(static_cast<double>(i), ax);
        const std::size_t idx = jj * static_cast<std::size_t>(nk) + static_cast<std::size_t>(i);
        out[idx] = in[idx] * (phase * (fx * fy));
      }
    });
  }
  void spectral_inverse_laplacian(std::span<const cplx> in, std::span<cplx> out, int nx, int ny) const {
    const int nk = nx / 2 + 1;
    for_each_index(parallel, static_cast<std::size_t>(ny), [&](std::size_t jj) {
      const int ky = wavenumber(static_cast<int>(jj), ny);
      for (int i = 0; i < nk; ++i) {
        const std::size_t idx = jj * static_cast<std::size_t>(nk) + static_cast<std::size_t>(i);
        const double k2 = static_cast<double>(i) * i + static_cast<double>(ky) * ky;
        out[idx] = k2 == 0.0 ? cplx{0.0, 0.0} : in[idx] / (-k2);
      }
    });
  }
  void spectral_truncate(std::span<cplx> spec, int nx, int ny, int kcx, int kcy) const {
    const int nk = nx / 2 + 1;
    for_each_index(parallel, static_cast<std::size_t>(ny), [&](std::size_t jj) {
      const int ky = wavenumber(static_cast<int>(jj), ny);
      const bool row_out = std::abs(ky) > kcy;
      for (int i = 0; i < nk; ++i) {
        if (row_out || i > kcx) spec[jj * static_cast<std::size_t>(nk) + static_cast<std::size_t>(i)] = 0.0;
      }
    });
  }
  void interpolate_cubic(int nx, int ny, std::span<const double* const> fields, std::span<const double> xs,
                         std::span<const double> ys, std::span<double* const> outs) const {
    const double two_pi = 2.0 * M_PI;
    const double sx = nx / two_pi;
    const double sy = ny / two_pi;
    const std::size_t nf = fields.size();
    for_each_index(parallel, xs.size(), [&](std::size_t p) {
      double gx = xs[p] * sx;
      double gy = ys[p] * sy;
      const double fx0 = std::floor(gx);
      const double fy0 = std::floor(gy);
      const double tx = gx - fx0;
      const double ty = gy - fy0;
      long ix = static_cast<long>(fx0) % nx;
      long iy = static_cast<long>(fy0) % ny;
      if (ix < 0) ix += nx;
      if (iy < 0) iy += ny;
      double wx[4], wy[4];
      auto weights = [](double t, double* w) {
        w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
        w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
        w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
      };
      weights(tx, wx);
      weights(ty, wy);
      long cols[4], rows[4];
      for (int k = 0; k < 4; ++k) {
        cols[k] = (ix - 1 + k + nx) % nx;
        rows[k] = (iy - 1 + k + ny) % ny;
      }
      for (std::size_t f = 0; f < nf; ++f) {
        const double* v = fields[f];
        double acc = 0.0;
        for (int b = 0; b < 4; ++b) {
          const double* row = v + rows[b] * nx;
          const double r = wx[0] * row[cols[0]] + wx[1] * row[cols[1]] + wx[2] * row[cols[2]] + wx[3] * row[cols[3]];
          acc += wy[b] * r;
        }
        outs[f][p] = acc;
      }
    });
  }
};

constexpr Impl kParallel{true};
constexpr Impl kSerial{false};

}  // namespace

int thread_count() {
  int n = g_threads.load();
  if (n == 0) {
    n = resolve_threads();
    g_threads.store(n);
  }
  return n;
}

void set_thread_count(int n) { g_threads.store(std::max(n, 1)); }

#define FLUIDSPAN_KERNEL_DEFS(IMPL)                                                                             \
  void lincomb(std::span<double> out, double a, std::span<const double> x, double b,                           \
               std::span<const double> y) {                                                                     \
    IMPL.lincomb(out, a, x, b, y);                                                                              \
  }                                                                                                             \
  void lincomb(std::span<cplx> out, double a, std::span<const cplx> x, double b, std::span<const cplx> y) {    \
    IMPL.lincomb(out, a, x, b, y);                                                                              \
  }                                                                                                             \
  void multiply(std::span<double> out, std::span<const double> a, std::span<const double> b) {                 \
    IMPL.multiply(out, a, b);                                                                                   \
  }                                                                                                             \
  void dot2(std::span<double> out, std::span<const double> a1, std::span<const double> b1,                     \
            std::span<const double> a2, std::span<const double> b2, double s) {                                 \
    IMPL.dot2(out, a1, b1, a2, b2, s);                                                                          \
  }                                                                                                             \
  double sum(std::span<const double> a) { return IMPL.sum(a); }                                                 \
  double sum_product(std::span<const double> a, std::span<const double> b) { return IMPL.sum_product(a, b); } \
  double sum_abs_pow(std::span<const double> a, double p) { return IMPL.sum_abs_pow(a, p); }                   \
  double max_abs(std::span<const double> a) { return IMPL.max_abs(a); }                                         \
  double max_hypot(std::span<const double> a, std::span<const double> b) { return IMPL.max_hypot(a, b); }     \
  double max_opnorm2x2(std::span<const double> a11, std::span<const double> a12,                                \
                       std::span<const double> a21, std::span<const double> a22) {                              \
    return IMPL.max_opnorm2x2(a11, a12, a21, a22);                                                              \
  }                                                                                                             \
  void spectral_derivative(std::span<const cplx> in, std::span<cplx> out, int nx, int ny, int ax, int ay) {    \
    IMPL.spectral_derivative(in, out, nx, ny, ax, ay);                                                          \
  }                                                                                                             \
  void spectral_inverse_laplacian(std::span<const cplx> in, std::span<cplx> out, int nx, int ny) {             \
    IMPL.spectral_inverse_laplacian(in, out, nx, ny);                                                           \
  }                                                                                                             \
  void spectral_truncate(std::span<cplx> spec, int nx, int ny, int kcx, int kcy) {                             \
    IMPL.spectral_truncate(spec, nx, ny, kcx, kcy);                                                             \
  }                                                                                                             \
  void interpolate_cubic(int nx, int ny, std::span<const double* const> fields, std::span<const double> xs,   \
                         std::span<const double> ys, std::span<double* const> outs) {                           \
    IMPL.interpolate_cubic(nx, ny, fields, xs, ys, outs);                                                       \
  }

FLUIDSPAN_KERNEL_DEFS(kParallel)

namespace serial {
FLUIDSPAN_KERNEL_DEFS(kSerial)
}  // namespace serial

#undef FLUIDSPAN_KERNEL_DEFS

}  // namespace fluidspan::kernels
