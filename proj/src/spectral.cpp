#include "fluidspan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fluidspan/errors.hpp"
#include "fluidspan/kernels.hpp"

namespace fluidspan {

ScalarField derivative(const ScalarField& f, int ax, int ay) {
  if (ax < 0 || ay < 0 || ax + ay > 4) throw ParameterError("derivative order must satisfy |alpha| <= 4");
  f.require_finite();
  const Grid& g = f.grid();
  if (ax == 0 && ay == 0) return f;
  std::vector<cplx> s(g.spectral_size());
  kernels::spectral_derivative(f.spectrum(), s, g.nx(), g.ny(), ax, ay);
  return ScalarField::from_spectrum(g, std::move(s));
}

ScalarField laplacian(const ScalarField& f) { return derivative(f, 2, 0) + derivative(f, 0, 2); }

ScalarField invert_laplacian(const ScalarField& f) {
  f.require_finite();
  const double m = f.mean();
  if (std::abs(m) > 1e-10 * f.max_abs())
    throw SolvabilityError("inverse Laplacian needs mean-zero data, mean = " + std::to_string(m), m);
  const Grid& g = f.grid();
  std::vector<cplx> s(g.spectral_size());
  kernels::spectral_inverse_laplacian(f.spectrum(), s, g.nx(), g.ny());
  return ScalarField::from_spectrum(g, std::move(s));
}

VectorField gradient(const ScalarField& f) { return {derivative(f, 1, 0), derivative(f, 0, 1)}; }

VectorField perp_gradient(const ScalarField& f) { return {-derivative(f, 0, 1), derivative(f, 1, 0)}; }

VectorField biot_savart(const ScalarField& omega) { return perp_gradient(invert_laplacian(omega)); }

ScalarField curl(const VectorField& u) { return derivative(u.y, 1, 0) - derivative(u.x, 0, 1); }

ScalarField divergence(const VectorField& u) { return derivative(u.x, 1, 0) + derivative(u.y, 0, 1); }

ScalarField dealias(const ScalarField& f) {
  const Grid& g = f.grid();
  std::vector<cplx> s(f.spectrum().begin(), f.spectrum().end());
  kernels::spectral_truncate(s, g.nx(), g.ny(), g.cutoff_x(), g.cutoff_y());
  return ScalarField::from_spectrum(g, std::move(s));
}

ScalarField product(const ScalarField& f, const ScalarField& g) { return dealias(f.times(g)); }

ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g) {
  f.require_same_grid(g);
  const ScalarField fx = derivative(f, 1, 0), fy = derivative(f, 0, 1);
  const ScalarField gx = derivative(g, 1, 0), gy = derivative(g, 0, 1);
  std::vector<double> v(f.grid().size());
  kernels::dot2(v, fx.values(), gy.values(), fy.values(), gx.values(), -1.0);
  return dealias(ScalarField(f.grid(), std::move(v)));
}

double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p)) return f.max_abs();
  return std::pow(kernels::sum_abs_pow(f.values(), p) * f.grid().cell_area(), 1.0 / p);
}

double sobolev_norm(const ScalarField& f, int k, double p, bool allow_p2) {
  if (k < 0 || k > 3) throw ParameterError("Sobolev order must lie in 0..3");
  if (!(p > 2.0 || (allow_p2 && p == 2.0)))
    throw ParameterError("Sobolev exponent must exceed 2, got " + std::to_string(p));
  double total = 0.0;
  for (int m = 0; m <= k; ++m)
    for (int a = 0; a <= m; ++a) total += lp_norm(derivative(f, a, m - a), p);
  return total;
}

PointJet evaluate_jet(const ScalarField& f, double x, double y) {
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny(), nk = g.spectral_nx();
  auto spec = f.spectrum();
  PointJet jet;
  for (int j = 0; j < ny; ++j) {
    const double ky = g.ky(j);
    for (int i = 0; i < nk; ++i) {
      const cplx c = spec[static_cast<std::size_t>(j) * nk + i];
      if (c == cplx{}) continue;
      const double w = (i == 0 || 2 * i == nx) ? 1.0 : 2.0;
      const double kx = i;
      const double ph = kx * x + ky * y;
      const cplx e = c * cplx(std::cos(ph), std::sin(ph));
      const double re = w * e.real(), im = w * e.imag();
      // d/dx of Re(c e^{iφ}) = −kx Im(c e^{iφ})
      jet.value += re;
      jet.grad[0] -= kx * im;
      jet.grad[1] -= ky * im;
      jet.hess[0] -= kx * kx * re;
      jet.hess[1] -= kx * ky * re;
      jet.hess[2] -= ky * ky * re;
    }
  }
  return jet;
}

double refined_sup(const ScalarField& f, int candidates) {
  const Grid& g = f.grid();
  auto v = f.values();
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto nc = std::min<std::size_t>(static_cast<std::size_t>(std::max(candidates, 1)), idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nc), idx.end(),
                    [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  double best = f.max_abs();
  const double hmax = std::max(g.dx(), g.dy());
  for (std::size_t c = 0; c < nc; ++c) {
    double x = g.x(static_cast<int>(idx[c] % g.nx()));
    double y = g.y(static_cast<int>(idx[c] / g.nx()));
    const double s = v[idx[c]] >= 0.0 ? 1.0 : -1.0;
    for (int it = 0; it < 12; ++it) {
      const PointJet jt = evaluate_jet(f, x, y);
      best = std::max(best, std::abs(jt.value));
      // Newton on s·f; fall back to a short gradient step where the Hessian is not concave.
      const double a = s * jt.hess[0], b = s * jt.hess[1], d = s * jt.hess[2];
      const double gx = s * jt.grad[0], gy = s * jt.grad[1];
      const double det = a * d - b * b;
      double sx, sy;
      if (a < 0.0 && det > 0.0) {
        sx = -(d * gx - b * gy) / det;
        sy = -(-b * gx + a * gy) / det;
      } else {
        const double gn = std::hypot(gx, gy);
        if (gn == 0.0) break;
        sx = 0.25 * hmax * gx / gn;
        sy = 0.25 * hmax * gy / gn;
      }
      const double len = std::hypot(sx, sy);
      if (len > hmax) {
        sx *= hmax / len;
        sy *= hmax / len;
      }
      x += sx;
      y += sy;
      if (len < 1e-14) break;
    }
    best = std::max(best, std::abs(evaluate_jet(f, x, y).value));
  }
  return best;
}

double gradient_opnorm_sup(const VectorField& u) {
  const ScalarField a11 = derivative(u.x, 1, 0), a12 = derivative(u.x, 0, 1);
  const ScalarField a21 = derivative(u.y, 1, 0), a22 = derivative(u.y, 0, 1);
  return kernels::max_opnorm2x2(a11.values(), a12.values(), a21.values(), a22.values());
}

double kato_ratio(const ScalarField& omega, double p) {
  const double w_inf = omega.max_abs();
  if (w_inf == 0.0) return 0.0;
  const double grad_u = gradient_opnorm_sup(biot_savart(omega));
  return grad_u / ((1.0 + std::log(2.0 + sobolev_norm(omega, 1, p))) * w_inf);
}

double tail_enstrophy_fraction(const ScalarField& omega) {
  const Grid& g = omega.grid();
  const int nx = g.nx(), nk = g.spectral_nx();
  const double kcx = g.cutoff_x(), kcy = g.cutoff_y();
  auto spec = omega.spectrum();
  double total = 0.0, tail = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    const double ky = std::abs(g.ky(j));
    for (int i = 0; i < nk; ++i) {
      const double w = (i == 0 || 2 * i == nx) ? 1.0 : 2.0;
      const double e = w * std::norm(spec[static_cast<std::size_t>(j) * nk + i]);
      total += e;
      const double r = std::max(i / kcx, ky / kcy);
      if (r > 0.875 && r <= 1.0) tail += e;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace fluidspan
