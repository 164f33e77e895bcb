#include <cmath>

#include "doctest.h"
#include "fluidspan/models.hpp"

using namespace fluidspan;

namespace {

double l2(const ScalarField& f) { return std::sqrt(f.times(f).integral()); }

double rel_drift(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FluidState run(FluidState s, double t_end, const ModelOptions& opt = {}) {
  while (s.t < t_end - 1e-12) {
    double dt = std::min(0.9 * cfl_limit(s, opt), t_end - s.t);
    s = step(s, dt, opt);
  }
  return s;
}

}  // namespace

TEST_CASE("Euler eigenstate has a vanishing tendency") {
  Grid g(64, 64);
  auto s = make_initial_state(ModelKind::Euler, g, {VorticityProfile::eigen});
  CHECK(rhs(s).a.max_abs() <= 1e-10);
}

TEST_CASE("Boussinesq with constant density matches Euler") {
  Grid g(32, 32);
  auto e = make_initial_state(ModelKind::Euler, g, {});
  auto b = make_initial_state(ModelKind::Boussinesq, g, {VorticityProfile::standard, 0.0});
  auto te = rhs(e), tb = rhs(b);
  CHECK((te.a - tb.a).max_abs() == 0.0);
  CHECK(tb.b.max_abs() == 0.0);
}

TEST_CASE("MHD with J = 0 reduces to transport by u -/+ B") {
  Grid g(32, 32);
  auto s = make_initial_state(ModelKind::MHD_Elsasser, g, {VorticityProfile::standard, 0.0});
  auto d = derive(s);
  CHECK(d.J->max_abs() <= 1e-15);
  CHECK(mhd_q_operator(d.u, *d.rho).max_abs() <= 1e-15);
  auto k = rhs(s);
  // B = 0 as well here, so both reduce to the Euler tendency of ω
  auto euler = rhs(make_initial_state(ModelKind::Euler, g, {}));
  CHECK((k.a - euler.a).max_abs() <= 1e-14);
  CHECK((k.b - euler.a).max_abs() <= 1e-14);
}

TEST_CASE("Elsasser transform examples") {
  Grid g(16, 16);
  auto w = ScalarField::from_function(g, [](double x, double) { return std::sin(x); });
  auto J = ScalarField::from_function(g, [](double, double y) { return std::cos(y); });
  auto [xi0, eta0] = elsasser_transform(w, ScalarField(g));
  CHECK((xi0 - w).max_abs() == 0.0);
  CHECK((eta0 - w).max_abs() == 0.0);
  auto [xi, eta] = elsasser_transform(w, J);
  CHECK((xi - (w + J)).max_abs() == 0.0);
  CHECK((eta - (w - J)).max_abs() == 0.0);
  auto [w2, J2] = elsasser_inverse(xi, eta);
  CHECK((w2 - w).max_abs() <= 1e-15);
  CHECK((J2 - J).max_abs() <= 1e-15);
  CHECK_THROWS_AS(elsasser_transform(w, ScalarField(Grid(32, 32))), ShapeError);
}

TEST_CASE("the Elsasser operator Q closes the current equation") {
  // J̇ from the (ω, ρ) carrier is Δ(ρ̇); it must equal the explicit current tendency.
  Grid g(48, 48);
  auto s = make_initial_state(ModelKind::MHD_VorticityCurrent, g, {VorticityProfile::standard, 0.3});
  auto k = rhs(s);
  auto [dw, dJ] = mhd_vorticity_current_rhs(s.omega, s.rho);
  CHECK((dw - k.a).max_abs() <= 1e-13);
  CHECK((dJ - laplacian(k.b)).max_abs() <= 1e-11 * dJ.max_abs());
}

TEST_CASE("step leaves a velocity-free state unchanged") {
  Grid g(16, 16);
  auto s = make_initial_state(ModelKind::Boussinesq, g, {VorticityProfile::zero, 0.0});
  auto r = step(s, 0.1);
  CHECK(r.t == doctest::Approx(0.1));
  CHECK(r.omega.max_abs() == 0.0);
  CHECK((r.rho - s.rho).max_abs() == 0.0);
}

TEST_CASE("Euler eigenstate stays steady") {
  Grid g(64, 64);
  auto s0 = make_initial_state(ModelKind::Euler, g, {VorticityProfile::eigen});
  auto s = s0;
  for (int i = 0; i < 1000; ++i) s = step(s, 1e-3);
  CHECK(s.t == doctest::Approx(1.0));
  CHECK(l2(s.omega - s0.omega) / l2(s0.omega) <= 1e-8);
}

TEST_CASE("CFL guard and limit arithmetic") {
  Grid g(128, 128);
  auto still = make_initial_state(ModelKind::Euler, g, {VorticityProfile::zero});
  CHECK(cfl_limit(still) == doctest::Approx(0.5 * g.dx() / 1e-12));
  // shear profile: u = (sin y, 0), so ‖u‖∞ = 1 up to grid sampling of the peak
  auto shear = make_initial_state(ModelKind::Euler, g, {VorticityProfile::shear});
  CHECK(cfl_limit(shear) == doctest::Approx(0.5 * 2 * M_PI / 128).epsilon(1e-12));
  CHECK(0.5 * 2 * M_PI / 128 == doctest::Approx(0.02454).epsilon(1e-4));
  CHECK_THROWS_AS(step(shear, 0.1), PreconditionError);

  // MHD with ‖u‖∞ = ‖B‖∞ = 1: ρ = −cos x gives B = (0, sin x)
  FluidState m{ModelKind::MHD_VorticityCurrent, 0.0, shear.omega,
               ScalarField::from_function(g, [](double x, double) { return -std::cos(x); }), ScalarField(g),
               ScalarField(g)};
  CHECK(cfl_limit(m) == doctest::Approx(0.25 * 2 * M_PI / 128).epsilon(1e-12));
  CHECK(cfl_limit(m) == doctest::Approx(0.01227).epsilon(1e-3));
}

TEST_CASE("conserved quantities examples") {
  Grid g(32, 32);
  auto still = make_initial_state(ModelKind::IIE, g, {VorticityProfile::zero, 0.0});
  auto c0 = conserved_quantities(still);
  CHECK(c0.E_kinetic == 0.0);
  CHECK(c0.E_model == 0.0);
  CHECK(*c0.mass == doctest::Approx(4 * M_PI * M_PI));

  FluidState cosx{ModelKind::Euler, 0.0, ScalarField::from_function(g, [](double x, double) { return std::cos(x); }),
                  ScalarField::constant(g, 1.0), ScalarField(g), ScalarField(g)};
  CHECK(conserved_quantities(cosx).E_kinetic == doctest::Approx(M_PI * M_PI).epsilon(1e-13));

  auto iie = make_initial_state(ModelKind::IIE, g, {VorticityProfile::standard, 0.0});
  auto ci = conserved_quantities(iie);
  CHECK(ci.E_model == ci.E_kinetic);
}

TEST_CASE("initial data has the requested perturbation norm") {
  Grid g(32, 32);
  const double delta = 0.05;
  auto b = make_initial_state(ModelKind::Boussinesq, g, {VorticityProfile::standard, delta});
  CHECK(sobolev_norm(b.rho - ScalarField::constant(g, 1.0), 2, 4.0) == doctest::Approx(delta).epsilon(1e-12));
  auto m = make_initial_state(ModelKind::MHD_VorticityCurrent, g, {VorticityProfile::standard, delta});
  CHECK(sobolev_norm(m.rho - ScalarField::constant(g, 1.0), 3, 4.0) == doctest::Approx(delta).epsilon(1e-12));
  auto i = make_initial_state(ModelKind::IIE, g, {VorticityProfile::standard, delta});
  auto mu = i.rho.map([](double v) { return 1.0 / v; });
  CHECK(sobolev_norm(mu - ScalarField::constant(g, 1.0), 2, 4.0) == doctest::Approx(delta).epsilon(1e-12));
  CHECK(std::abs(i.omega.mean()) <= 1e-15);
}

TEST_CASE("short-time conservation for every model") {
  Grid g(48, 48);
  const double t_end = 0.5;
  for (auto kind : {ModelKind::Euler, ModelKind::Boussinesq, ModelKind::MHD_VorticityCurrent, ModelKind::MHD_Elsasser,
                    ModelKind::IIE}) {
    CAPTURE(to_string(kind));
    auto s0 = make_initial_state(kind, g, {VorticityProfile::standard, 0.1});
    auto c0 = conserved_quantities(s0);
    auto s1 = run(s0, t_end);
    auto c1 = conserved_quantities(s1);
    CHECK(rel_drift(c1.E_model, c0.E_model) <= 1e-4);
    if (c0.mass) CHECK(rel_drift(*c1.mass, *c0.mass) <= 1e-8);
    if (c0.cross_helicity) CHECK(std::abs(*c1.cross_helicity - *c0.cross_helicity) <= 1e-4 * c0.E_model);
    if (c0.momentum_x) {
      CHECK(std::abs(*c1.momentum_x) <= 1e-9);
      CHECK(std::abs(*c1.momentum_y) <= 1e-9);
    }
    if (kind != ModelKind::MHD_Elsasser && kind != ModelKind::MHD_VorticityCurrent)
      CHECK(std::abs(s1.omega.mean()) <= 1e-12);
  }
}

TEST_CASE("the two MHD carriers agree") {
  Grid g(32, 32);
  auto vc = make_initial_state(ModelKind::MHD_VorticityCurrent, g, {VorticityProfile::standard, 0.2});
  auto el = to_elsasser(vc);
  auto back = to_vorticity_current(el);
  CHECK((back.omega - vc.omega).max_abs() <= 1e-14);
  CHECK((back.rho - vc.rho).max_abs() <= 1e-14);
  const double dt = 0.5 * cfl_limit(vc);
  for (int i = 0; i < 20; ++i) {
    vc = step(vc, dt);
    el = step(el, dt);
  }
  auto el_vc = to_vorticity_current(el);
  CHECK(l2(el_vc.omega - vc.omega) / l2(vc.omega) <= 1e-10);
  CHECK(l2(el_vc.rho - vc.rho) / l2(vc.rho) <= 1e-10);
}

TEST_CASE("non-finite stages raise an instability error") {
  Grid g(16, 16);
  auto s = make_initial_state(ModelKind::Euler, g, {});
  s.omega = 1e200 * s.omega;  // u·∇ω overflows
  CHECK_THROWS_WITH_AS(step(s, 0.1 * cfl_limit(s)), doctest::Contains("stage 1"), InstabilityError);
}
