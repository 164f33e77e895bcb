#include <cmath>

#include "doctest.h"
#include "fluidspan/elliptic.hpp"

using namespace fluidspan;

namespace {

double l2(const ScalarField& f) { return std::sqrt(f.times(f).integral()); }

ScalarField field(const Grid& g, double (*fn)(double, double)) { return ScalarField::from_function(g, fn); }

}  // namespace

TEST_CASE("homogeneous density gives q = 0 in one iteration") {
  Grid g(32, 32);
  auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  auto sol = solve_q(ScalarField::constant(g, 1.0), w);
  CHECK(sol.q.max_abs() == 0.0);
  CHECK(sol.report.iterations == 1);
  CHECK(sol.report.residual == 0.0);

  auto u = recover_velocity_iie(ScalarField::constant(g, 1.0), w);
  auto ub = biot_savart(w);
  CHECK((u.x - ub.x).max_abs() == 0.0);
  CHECK((u.y - ub.y).max_abs() == 0.0);
}

TEST_CASE("manufactured solution for the variable-coefficient operator") {
  Grid g(64, 64);
  auto qstar = field(g, [](double x, double y) { return std::sin(x + y); });
  auto mu = field(g, [](double x, double) { return 1.0 + 0.05 * std::sin(x); });  // ρ⁻¹
  auto f = variable_laplacian(mu, qstar);
  for (auto m : {EllipticMethod::automatic, EllipticMethod::fixed_point, EllipticMethod::preconditioned_cg}) {
    EllipticOptions opt;
    opt.method = m;
    auto sol = solve_variable_poisson(mu, f, opt);
    CHECK(l2(sol.q - qstar) / l2(qstar) <= 1e-8);
    CHECK(sol.report.residual <= opt.tol);
    CHECK(sol.report.residual >= 0.0);
  }
}

TEST_CASE("perturbative case converges with O(delta) contraction") {
  Grid g(64, 64);
  const double delta = 0.05;
  auto theta = field(g, [](double, double y) { return std::sin(y); });
  auto mu = ScalarField::constant(g, 1.0) + delta * theta;
  auto rho = mu.map([](double v) { return 1.0 / v; });
  auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  auto sol = solve_q(rho, w);
  CHECK(sol.report.method == EllipticMethod::fixed_point);
  CHECK(sol.report.residual <= 1e-10);
  CHECK(sol.report.contraction_estimate > 0.0);
  CHECK(sol.report.contraction_estimate <= 2.0 * delta);
  // independent residual through the operator itself
  auto ku = biot_savart(w);
  auto m1 = delta * theta;
  auto f = -1.0 * divergence({m1.times(ku.x), m1.times(ku.y)});
  CHECK(l2(variable_laplacian(mu, sol.q) - f) / l2(f) <= 1e-10);
}

TEST_CASE("contraction grows with the size of the perturbation") {
  Grid g(32, 32);
  auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y) + 0.3 * std::cos(2 * x); });
  double prev = 0.0;
  for (double delta : {0.01, 0.05, 0.2}) {
    auto mu = field(g, [](double x, double y) { return std::sin(y) * std::cos(x); });
    mu = ScalarField::constant(g, 1.0) + delta * mu;
    auto sol = solve_q(mu.map([](double v) { return 1.0 / v; }), w);
    CHECK(sol.report.contraction_estimate > prev);
    CHECK(sol.report.contraction_estimate <= 1.5 * delta);
    prev = sol.report.contraction_estimate;
  }
}

TEST_CASE("strong inhomogeneity falls back to preconditioned CG") {
  Grid g(32, 32);
  auto rho = field(g, [](double x, double y) { return 1.0 + 0.95 * std::sin(x) * std::sin(y); });
  auto w = field(g, [](double x, double y) { return std::cos(x) * std::sin(2 * y); });
  auto sol = solve_q(rho, w);
  CHECK(sol.report.method == EllipticMethod::preconditioned_cg);
  CHECK(sol.report.residual <= 1e-10);
}

TEST_CASE("fixed point and CG agree within 10 tol") {
  Grid g(32, 32);
  for (double delta : {0.02, 0.1, 0.3}) {
    auto rho = field(g, [](double x, double y) { return std::cos(x + 2 * y); });
    rho = ScalarField::constant(g, 1.0) + delta * rho;
    auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y) - 0.5 * std::sin(3 * y); });
    EllipticOptions a, b;
    a.method = EllipticMethod::fixed_point;
    b.method = EllipticMethod::preconditioned_cg;
    auto qa = solve_q(rho, w, a).q, qb = solve_q(rho, w, b).q;
    CHECK(l2(qa - qb) / std::max(l2(qa), 1e-300) <= 10 * a.tol);
  }
}

TEST_CASE("recovered IIE velocity: divergence, curl of momentum, zero mean momentum") {
  Grid g(64, 64);
  const double delta = 0.1;
  auto rho = field(g, [](double x, double) { return std::cos(x); });
  rho = ScalarField::constant(g, 1.0) + delta * rho;
  auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  auto u = recover_velocity_iie(rho, w);
  const double gu = gradient_opnorm_sup(u);
  CHECK(divergence(u).max_abs() <= 1e-9 * gu);
  auto mx = rho.times(u.x), my = rho.times(u.y);
  CHECK((curl({mx, my}) - w).max_abs() <= 1e-8 * w.max_abs());
  CHECK(std::abs(mx.integral()) <= 1e-10);
  CHECK(std::abs(my.integral()) <= 1e-10);
}

TEST_CASE("IIE velocity is stable under grid refinement for band-limited data") {
  auto rho_fn = [](double x, double y) { return 1.0 + 0.1 * std::cos(x) * std::sin(y); };
  auto w_fn = [](double x, double y) { return std::sin(x) * std::sin(y) + 0.2 * std::cos(2 * y); };
  Grid g1(32, 32), g2(64, 64);
  auto u1 = recover_velocity_iie(ScalarField::from_function(g1, rho_fn), ScalarField::from_function(g1, w_fn));
  auto u2 = recover_velocity_iie(ScalarField::from_function(g2, rho_fn), ScalarField::from_function(g2, w_fn));
  // compare on the coarse nodes
  double err = 0.0;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i)
      err = std::max({err, std::abs(u1.x(i, j) - u2.x(2 * i, 2 * j)), std::abs(u1.y(i, j) - u2.y(2 * i, 2 * j))});
  CHECK(err <= 1e-6);
}

TEST_CASE("vacuum is rejected") {
  Grid g(16, 16);
  auto rho = field(g, [](double x, double) { return std::sin(x); });
  auto w = field(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  CHECK_THROWS_AS(solve_q(rho, w), VacuumError);
}

TEST_CASE("non-convergence reports the solver state") {
  Grid g(32, 32);
  auto rho = field(g, [](double x, double y) { return 1.0 + 0.9 * std::sin(x) * std::sin(y); });
  auto w = field(g, [](double x, double y) { return std::cos(x) * std::sin(2 * y); });
  EllipticOptions opt;
  opt.method = EllipticMethod::fixed_point;
  opt.max_iter = 3;
  try {
    solve_q(rho, w, opt);
    FAIL("expected convergence error");
  } catch (const EllipticConvergenceError& e) {
    CHECK(e.report().iterations == 3);
    CHECK(e.report().residual > opt.tol);
  }
}
