#include "fluidspan/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "fluidspan/kernels.hpp"

namespace fluidspan {

namespace {

// The part of f the discrete operator can reach: no mean, and nothing on the
// Nyquist lines, where odd derivatives vanish so ∇·(μ∇q) has no content.
// Without this the residual stalls at the Nyquist energy of f once the
// solution fills its spectrum.
ScalarField zero_mean(const ScalarField& f) {
  const Grid& g = f.grid();
  std::vector<cplx> spec(f.spectrum().begin(), f.spectrum().end());
  const int nxh = g.spectral_nx();
  spec[0] = 0.0;
  for (int j = 0; j < g.ny(); ++j) spec[static_cast<std::size_t>(j) * nxh + nxh - 1] = 0.0;
  for (int i = 0; i < nxh; ++i) spec[static_cast<std::size_t>(g.ny() / 2) * nxh + i] = 0.0;
  return ScalarField::from_spectrum(g, spec);
}

double l2(const ScalarField& f) { return std::sqrt(kernels::sum_product(f.values(), f.values()) * f.grid().cell_area()); }

double dot(const ScalarField& a, const ScalarField& b) { return kernels::sum_product(a.values(), b.values()); }

double relative_residual(const ScalarField& mu, const ScalarField& q, const ScalarField& f, double fnorm) {
  return l2(zero_mean(f - variable_laplacian(mu, q))) / fnorm;
}

// q_{n+1} = Δ⁻¹[f − ∇·((μ−1)∇q_n)]; returns false when the contraction is too weak.
bool fixed_point(const ScalarField& mu, const ScalarField& f, double fnorm, const EllipticOptions& opt,
                 bool may_abort, ScalarField& q, EllipticSolveReport& rep) {
  const ScalarField m1 = mu - ScalarField::constant(mu.grid(), 1.0);
  double prev_update = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    ScalarField rhs = zero_mean(f - variable_laplacian(m1, q));
    ScalarField next = invert_laplacian(rhs);
    const double update = l2(next - q);
    q = next;
    rep.iterations = it;
    if (it >= 2 && prev_update > 0.0) rep.contraction_estimate = update / prev_update;
    prev_update = update;
    rep.residual = relative_residual(mu, q, f, fnorm);
    if (rep.residual <= opt.tol) return true;
    if (may_abort && it >= 3 && rep.contraction_estimate >= opt.contraction_limit) return false;
  }
  return false;
}

// PCG on the SPD operator −∇·(μ∇·) over mean-zero fields, preconditioned by −Δ⁻¹.
bool preconditioned_cg(const ScalarField& mu, const ScalarField& f, double fnorm, const EllipticOptions& opt,
                       ScalarField& q, EllipticSolveReport& rep) {
  auto apply = [&](const ScalarField& v) { return -1.0 * variable_laplacian(mu, v); };
  auto precond = [&](const ScalarField& r) { return -1.0 * invert_laplacian(zero_mean(r)); };
  ScalarField r = zero_mean(-1.0 * f - apply(q));
  ScalarField z = precond(r);
  ScalarField p = z;
  double rz = dot(r, z);
  const int start = rep.iterations;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const ScalarField ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    q = q.combine(1.0, p, alpha);
    r = zero_mean(r.combine(1.0, ap, -alpha));
    rep.iterations = start + it;
    rep.residual = l2(r) / fnorm;
    if (rep.residual <= opt.tol) {
      // confirm against the true residual, not the recursively updated one
      rep.residual = relative_residual(mu, q, f, fnorm);
      if (rep.residual <= opt.tol) return true;
      r = zero_mean(-1.0 * f - apply(q));
    }
    z = precond(r);
    const double rz_new = dot(r, z);
    p = z.combine(1.0, p, rz_new / rz);
    rz = rz_new;
  }
  rep.residual = relative_residual(mu, q, f, fnorm);
  return rep.residual <= opt.tol;
}

}  // namespace

std::string to_string(EllipticMethod m) {
  switch (m) {
    case EllipticMethod::automatic: return "automatic";
    case EllipticMethod::fixed_point: return "fixed_point";
    case EllipticMethod::preconditioned_cg: return "preconditioned_cg";
  }
  return "?";
}

ScalarField variable_laplacian(const ScalarField& mu, const ScalarField& q) {
  return divergence({mu.times(derivative(q, 1, 0)), mu.times(derivative(q, 0, 1))});
}

ScalarField reciprocal_density(const ScalarField& rho) {
  rho.require_finite();
  double lo = rho.values()[0];
  for (double v : rho.values()) lo = std::min(lo, v);
  if (!(lo > 1e-12 * std::max(1.0, rho.max_abs())))
    throw VacuumError("density touches zero (min rho = " + std::to_string(lo) + ")");
  return rho.map([](double v) { return 1.0 / v; });
}

EllipticSolution solve_variable_poisson(const ScalarField& mu, const ScalarField& f_in, const EllipticOptions& opt) {
  mu.require_same_grid(f_in);
  const ScalarField f = zero_mean(f_in);
  EllipticSolveReport rep;
  rep.method = opt.method == EllipticMethod::preconditioned_cg ? EllipticMethod::preconditioned_cg
                                                               : EllipticMethod::fixed_point;
  ScalarField q(mu.grid());
  const double fnorm = l2(f);
  if (fnorm == 0.0) {
    rep.iterations = 1;
    return {q, rep};
  }
  bool ok = false;
  if (opt.method != EllipticMethod::preconditioned_cg) {
    ok = fixed_point(mu, f, fnorm, opt, opt.method == EllipticMethod::automatic, q, rep);
    if (!ok && opt.method == EllipticMethod::automatic) {
      rep.method = EllipticMethod::preconditioned_cg;
      q = ScalarField(mu.grid());
      rep.iterations = 0;
    }
  }
  if (!ok && rep.method == EllipticMethod::preconditioned_cg) ok = preconditioned_cg(mu, f, fnorm, opt, q, rep);
  if (!ok)
    throw EllipticConvergenceError("elliptic solve did not converge (" + to_string(rep.method) + ", residual " +
                                       std::to_string(rep.residual) + ")",
                                   rep);
  return {zero_mean(q), rep};
}

EllipticSolution solve_q(const ScalarField& rho, const ScalarField& omega, const EllipticOptions& opt) {
  rho.require_same_grid(omega);
  const ScalarField mu = reciprocal_density(rho);
  const ScalarField m1 = mu - ScalarField::constant(rho.grid(), 1.0);
  const VectorField ku = biot_savart(omega);
  const ScalarField f = -1.0 * divergence({m1.times(ku.x), m1.times(ku.y)});
  return solve_variable_poisson(mu, f, opt);
}

VectorField recover_velocity_iie(const ScalarField& rho, const ScalarField& omega, const EllipticOptions& opt,
                                 EllipticSolveReport* report) {
  const ScalarField mu = reciprocal_density(rho);
  const VectorField ku = biot_savart(omega);
  EllipticSolution sol = solve_q(rho, omega, opt);
  if (report) *report = sol.report;
  const VectorField gq = gradient(sol.q);
  return {mu.times(ku.x + gq.x), mu.times(ku.y + gq.y)};
}

}  // namespace fluidspan
