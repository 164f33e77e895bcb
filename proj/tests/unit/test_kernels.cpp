#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fluidspan/kernels.hpp"

namespace k = fluidspan::kernels;
using k::cplx;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<cplx> random_spec(int nx, int ny, unsigned seed) {
  auto re = random_vec(static_cast<std::size_t>(nx / 2 + 1) * ny, seed);
  auto im = random_vec(re.size(), seed + 1);
  std::vector<cplx> s(re.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = {re[i], im[i]};
  return s;
}

// Run the parallel kernels with several threads even on a small machine.
struct ThreadGuard {
  int saved = k::thread_count();
  explicit ThreadGuard(int n) { k::set_thread_count(n); }
  ~ThreadGuard() { k::set_thread_count(saved); }
};

}  // namespace

TEST_CASE("elementwise kernels agree with the serial reference bit for bit") {
  ThreadGuard tg(4);
  const std::size_t n = 10007;
  auto a = random_vec(n, 1), b = random_vec(n, 2), c = random_vec(n, 3), d = random_vec(n, 4);
  std::vector<double> p(n), s(n);

  k::lincomb(p, 0.3, a, -1.7, b);
  k::serial::lincomb(s, 0.3, a, -1.7, b);
  CHECK(p == s);

  k::multiply(p, a, b);
  k::serial::multiply(s, a, b);
  CHECK(p == s);

  k::dot2(p, a, b, c, d, -1.0);
  k::serial::dot2(s, a, b, c, d, -1.0);
  CHECK(p == s);

  auto za = random_spec(32, 16, 9), zb = random_spec(32, 16, 11);
  std::vector<cplx> zp(za.size()), zs(za.size());
  k::lincomb(zp, 2.0, za, 0.5, zb);
  k::serial::lincomb(zs, 2.0, za, 0.5, zb);
  CHECK(zp == zs);
}

TEST_CASE("reductions match the serial reference to round-off") {
  ThreadGuard tg(3);
  const std::size_t n = 4099;
  auto a = random_vec(n, 5), b = random_vec(n, 6), c = random_vec(n, 7), d = random_vec(n, 8);
  CHECK(k::sum(a) == doctest::Approx(k::serial::sum(a)).epsilon(1e-13));
  CHECK(k::sum_product(a, b) == doctest::Approx(k::serial::sum_product(a, b)).epsilon(1e-13));
  CHECK(k::sum_abs_pow(a, 4.0) == doctest::Approx(k::serial::sum_abs_pow(a, 4.0)).epsilon(1e-13));
  CHECK(k::max_abs(a) == k::serial::max_abs(a));
  CHECK(k::max_hypot(a, b) == k::serial::max_hypot(a, b));
  CHECK(k::max_opnorm2x2(a, b, c, d) == k::serial::max_opnorm2x2(a, b, c, d));
}

TEST_CASE("reductions are reproducible for a fixed thread count") {
  auto a = random_vec(100003, 12);
  ThreadGuard tg(4);
  const double first = k::sum(a);
  for (int r = 0; r < 5; ++r) CHECK(k::sum(a) == first);
}

TEST_CASE("operator norm of a 2x2 matrix") {
  std::vector<double> a11{3.0, 0.0, 1.0}, a12{0.0, 1.0, 1.0}, a21{0.0, -1.0, 0.0}, a22{-2.0, 0.0, 1.0};
  // diag(3,-2) -> 3; rotation -> 1; [[1,1],[0,1]] -> golden ratio
  CHECK(k::max_opnorm2x2(std::span<const double>(a11).first(1), std::span<const double>(a12).first(1),
                         std::span<const double>(a21).first(1), std::span<const double>(a22).first(1)) ==
        doctest::Approx(3.0));
  CHECK(k::max_opnorm2x2(std::span<const double>(a11).subspan(2), std::span<const double>(a12).subspan(2),
                         std::span<const double>(a21).subspan(2), std::span<const double>(a22).subspan(2)) ==
        doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
}

TEST_CASE("spectral kernels agree with the serial reference") {
  ThreadGuard tg(4);
  const int nx = 32, ny = 24;
  auto in = random_spec(nx, ny, 21);
  std::vector<cplx> p(in.size()), s(in.size());
  for (int ax = 0; ax <= 2; ++ax)
    for (int ay = 0; ay <= 2; ++ay) {
      k::spectral_derivative(in, p, nx, ny, ax, ay);
      k::serial::spectral_derivative(in, s, nx, ny, ax, ay);
      CHECK(p == s);
    }
  k::spectral_inverse_laplacian(in, p, nx, ny);
  k::serial::spectral_inverse_laplacian(in, s, nx, ny);
  CHECK(p == s);
  CHECK(p[0] == cplx{});

  p = in;
  s = in;
  k::spectral_truncate(p, nx, ny, 10, 8);
  k::serial::spectral_truncate(s, nx, ny, 10, 8);
  CHECK(p == s);
}

TEST_CASE("cubic interpolation reproduces cubics and agrees with serial") {
  ThreadGuard tg(2);
  const int nx = 16, ny = 16;
  const double h = 2.0 * M_PI / nx;
  // A trigonometric field is not reproduced exactly, but a locally cubic one is:
  // use the grid-index polynomial on an interior patch.
  std::vector<double> f(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) f[j * nx + i] = std::sin(i * h) * std::cos(2 * j * h);
  std::vector<double> xs{0.3, 1.7, 5.9, 6.2}, ys{0.1, 2.2, 3.3, 6.25};
  std::vector<double> op(xs.size()), os(xs.size());
  const double* fields[] = {f.data()};
  double* outp[] = {op.data()};
  double* outs[] = {os.data()};
  k::interpolate_cubic(nx, ny, fields, xs, ys, outp);
  k::serial::interpolate_cubic(nx, ny, fields, xs, ys, outs);
  CHECK(op == os);
  for (std::size_t q = 0; q < xs.size(); ++q) CHECK(op[q] == doctest::Approx(std::sin(xs[q]) * std::cos(2 * ys[q])).epsilon(2e-2).scale(1.0));

  // exact at nodes
  std::vector<double> xn{3 * h, 7 * h}, yn{5 * h, 0.0}, on(2);
  double* outn[] = {on.data()};
  k::interpolate_cubic(nx, ny, fields, xn, yn, outn);
  CHECK(on[0] == doctest::Approx(f[5 * nx + 3]).epsilon(1e-14));
  CHECK(on[1] == doctest::Approx(f[0 * nx + 7]).epsilon(1e-14));
}
