#include "fluidspan/models.hpp"

#include <cmath>
#include <map>

#include "fluidspan/kernels.hpp"

namespace fluidspan {

namespace {

// dealiased v·∇f
ScalarField advect(const VectorField& v, const ScalarField& f) {
  const ScalarField fx = derivative(f, 1, 0), fy = derivative(f, 0, 1);
  std::vector<double> out(f.grid().size());
  kernels::dot2(out, v.x.values(), fx.values(), v.y.values(), fy.values(), 1.0);
  return dealias(ScalarField(f.grid(), std::move(out)));
}

double integral_of_product(const ScalarField& a, const ScalarField& b) {
  return kernels::sum_product(a.values(), b.values()) * a.grid().cell_area();
}

double half_square_integral(const VectorField& v) {
  return 0.5 * (integral_of_product(v.x, v.x) + integral_of_product(v.y, v.y));
}

FluidState advance(const FluidState& s, const Tendency& k, double h) {
  FluidState r = s;
  r.t = s.t + h;
  if (s.kind == ModelKind::MHD_Elsasser) {
    r.xi = s.xi.combine(1.0, k.a, h);
    r.eta = s.eta.combine(1.0, k.b, h);
  } else {
    r.omega = s.omega.combine(1.0, k.a, h);
    if (s.kind != ModelKind::Euler) r.rho = s.rho.combine(1.0, k.b, h);
  }
  r.potential = s.potential + h * k.potential;
  return r;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Euler: return "Euler";
    case ModelKind::Boussinesq: return "Boussinesq";
    case ModelKind::MHD_VorticityCurrent: return "MHD_VorticityCurrent";
    case ModelKind::MHD_Elsasser: return "MHD_Elsasser";
    case ModelKind::IIE: return "IIE";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  static const std::map<std::string, ModelKind> names{
      {"Euler", ModelKind::Euler},
      {"euler", ModelKind::Euler},
      {"Boussinesq", ModelKind::Boussinesq},
      {"boussinesq", ModelKind::Boussinesq},
      {"MHD_VorticityCurrent", ModelKind::MHD_VorticityCurrent},
      {"mhd", ModelKind::MHD_VorticityCurrent},
      {"mhd-vorticity-current", ModelKind::MHD_VorticityCurrent},
      {"MHD_Elsasser", ModelKind::MHD_Elsasser},
      {"mhd-elsasser", ModelKind::MHD_Elsasser},
      {"IIE", ModelKind::IIE},
      {"iie", ModelKind::IIE},
  };
  auto it = names.find(s);
  if (it == names.end()) throw ParameterError("unknown model '" + s + "'");
  return it->second;
}

bool is_mhd(ModelKind k) { return k == ModelKind::MHD_VorticityCurrent || k == ModelKind::MHD_Elsasser; }

DerivedFields derive(const FluidState& s, const ModelOptions& opt) {
  switch (s.kind) {
    case ModelKind::Euler:
      return {biot_savart(s.omega), s.omega, std::nullopt, std::nullopt, std::nullopt, {}};
    case ModelKind::Boussinesq:
      return {biot_savart(s.omega), s.omega, s.rho, std::nullopt, std::nullopt, {}};
    case ModelKind::MHD_VorticityCurrent:
      return {biot_savart(s.omega), s.omega, s.rho, laplacian(s.rho), perp_gradient(s.rho), {}};
    case ModelKind::MHD_Elsasser: {
      auto [w, J] = elsasser_inverse(s.xi, s.eta);
      ScalarField rho = invert_laplacian(J) + ScalarField::constant(s.grid(), s.rho_mean);
      VectorField B = perp_gradient(rho);
      return {biot_savart(w), w, rho, J, B, {}};
    }
    case ModelKind::IIE: {
      DerivedFields d{VectorField{s.omega, s.omega}, s.omega, s.rho, std::nullopt, std::nullopt, {}};
      d.u = recover_velocity_iie(s.rho, s.omega, opt.elliptic, &d.elliptic);
      return d;
    }
  }
  throw ParameterError("unhandled model kind");
}

ScalarField mhd_q_operator(const VectorField& u, const ScalarField& rho) {
  const ScalarField rxx = derivative(rho, 2, 0), rxy = derivative(rho, 1, 1), ryy = derivative(rho, 0, 2);
  const ScalarField uxx = derivative(u.x, 1, 0), uxy = derivative(u.x, 0, 1);
  const ScalarField uyx = derivative(u.y, 1, 0), uyy = derivative(u.y, 0, 1);
  // Σ ∂ᵢuⱼ ∂ᵢ∂ⱼρ = ∂x ux ρxx + ∂x uy ρxy + ∂y ux ρxy + ∂y uy ρyy
  std::vector<double> s1(rho.grid().size()), s2(rho.grid().size());
  kernels::dot2(s1, uxx.values(), rxx.values(), uyy.values(), ryy.values(), 1.0);
  const ScalarField cross = uyx + uxy;
  kernels::multiply(s2, cross.values(), rxy.values());
  kernels::lincomb(s1, -2.0, s1, -2.0, s2);
  return dealias(ScalarField(rho.grid(), std::move(s1)));
}

std::pair<ScalarField, ScalarField> mhd_vorticity_current_rhs(const ScalarField& omega, const ScalarField& rho) {
  const VectorField u = biot_savart(omega);
  const VectorField B = perp_gradient(rho);
  const ScalarField J = laplacian(rho);
  ScalarField dw = advect(B, J) - advect(u, omega);
  ScalarField dJ = advect(B, omega) - advect(u, J) + mhd_q_operator(u, rho);
  return {dw, dJ};
}

Tendency rhs(const FluidState& s, const DerivedFields& d) {
  const Grid& g = s.grid();
  switch (s.kind) {
    case ModelKind::Euler:
      return {-1.0 * advect(d.u, s.omega), ScalarField(g), 0.0};
    case ModelKind::Boussinesq: {
      // {−x₂, ρ} = ∂₁ρ
      Tendency k{derivative(s.rho, 1, 0) - advect(d.u, s.omega), -1.0 * advect(d.u, s.rho), 0.0};
      k.potential = -integral_of_product(s.rho, d.u.y);
      return k;
    }
    case ModelKind::MHD_VorticityCurrent:
      // {ρ, J} = B·∇J
      return {advect(*d.B, *d.J) - advect(d.u, s.omega), -1.0 * advect(d.u, s.rho), 0.0};
    case ModelKind::MHD_Elsasser: {
      const ScalarField Q = mhd_q_operator(d.u, *d.rho);
      const VectorField minus = d.u.combine(1.0, *d.B, -1.0), plus = d.u.combine(1.0, *d.B, 1.0);
      return {Q - advect(minus, s.xi), -1.0 * (advect(plus, s.eta) + Q), 0.0};
    }
    case ModelKind::IIE: {
      const ScalarField ke = 0.5 * (product(d.u.x, d.u.x) + product(d.u.y, d.u.y));
      return {poisson_bracket(ke, s.rho) - advect(d.u, s.omega), -1.0 * advect(d.u, s.rho), 0.0};
    }
  }
  throw ParameterError("unhandled model kind");
}

Tendency rhs(const FluidState& s, const ModelOptions& opt) { return rhs(s, derive(s, opt)); }

std::pair<ScalarField, ScalarField> elsasser_transform(const ScalarField& omega, const ScalarField& J) {
  omega.require_same_grid(J);
  return {omega + J, omega - J};
}

std::pair<ScalarField, ScalarField> elsasser_inverse(const ScalarField& xi, const ScalarField& eta) {
  xi.require_same_grid(eta);
  return {xi.combine(0.5, eta, 0.5), xi.combine(0.5, eta, -0.5)};
}

FluidState to_elsasser(const FluidState& s) {
  if (s.kind == ModelKind::MHD_Elsasser) return s;
  if (s.kind != ModelKind::MHD_VorticityCurrent) throw ParameterError("Elsasser form needs an MHD state");
  FluidState r = s;
  r.kind = ModelKind::MHD_Elsasser;
  auto [xi, eta] = elsasser_transform(s.omega, laplacian(s.rho));
  r.xi = xi;
  r.eta = eta;
  r.rho_mean = s.rho.mean();
  r.omega = ScalarField(s.grid());
  r.rho = ScalarField(s.grid());
  return r;
}

FluidState to_vorticity_current(const FluidState& s) {
  if (s.kind == ModelKind::MHD_VorticityCurrent) return s;
  if (s.kind != ModelKind::MHD_Elsasser) throw ParameterError("vorticity-current form needs an MHD state");
  FluidState r = s;
  r.kind = ModelKind::MHD_VorticityCurrent;
  auto [w, J] = elsasser_inverse(s.xi, s.eta);
  r.omega = w;
  r.rho = invert_laplacian(J) + ScalarField::constant(s.grid(), s.rho_mean);
  r.xi = ScalarField(s.grid());
  r.eta = ScalarField(s.grid());
  return r;
}

double cfl_limit(const FluidState& s, const DerivedFields& d, double cfl) {
  double speed = d.u.max_norm();
  if (is_mhd(s.kind) && d.B) speed += d.B->max_norm();
  const Grid& g = s.grid();
  return cfl * std::min(g.dx(), g.dy()) / std::max(speed, 1e-12);
}

double cfl_limit(const FluidState& s, const ModelOptions& opt) { return cfl_limit(s, derive(s, opt), opt.cfl); }

FluidState step(const FluidState& s, double dt, const ModelOptions& opt, StepRecord* record) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  std::array<Tendency, 4> k{Tendency{ScalarField(s.grid()), ScalarField(s.grid())},
                            Tendency{ScalarField(s.grid()), ScalarField(s.grid())},
                            Tendency{ScalarField(s.grid()), ScalarField(s.grid())},
                            Tendency{ScalarField(s.grid()), ScalarField(s.grid())}};
  static constexpr double offsets[4] = {0.0, 0.5, 0.5, 1.0};
  FluidState stage = s;
  for (int i = 0; i < 4; ++i) {
    try {
      if (i > 0) stage = advance(s, k[i - 1], offsets[i] * dt);
      DerivedFields d = derive(stage, opt);
      if (i == 0) {
        const double lim = cfl_limit(s, d, opt.cfl);
        if (dt > lim * (1.0 + 1e-12))
          throw PreconditionError("dt = " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(lim));
      }
      k[i] = rhs(stage, d);
      if (!std::isfinite(k[i].potential)) throw InvalidFieldError("non-finite potential tendency");
      if (record) {
        record->stage[i] = stage;
        record->derived[i] = std::move(d);
      }
    } catch (const InvalidFieldError& e) {
      throw InstabilityError("non-finite values in RK4 stage " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  // s + dt/6 (k1 + 2k2 + 2k3 + k4)
  Tendency sum{k[0].a.combine(1.0, k[1].a, 2.0).combine(1.0, k[2].a, 2.0).combine(1.0, k[3].a, 1.0),
               k[0].b.combine(1.0, k[1].b, 2.0).combine(1.0, k[2].b, 2.0).combine(1.0, k[3].b, 1.0),
               k[0].potential + 2.0 * k[1].potential + 2.0 * k[2].potential + k[3].potential};
  FluidState r = advance(s, sum, dt / 6.0);
  r.t = s.t + dt;
  return r;
}

ConservedQuantities conserved_quantities(const FluidState& s, const ModelOptions& opt, double p, bool refine_sup) {
  const DerivedFields d = derive(s, opt);
  ConservedQuantities c;
  c.E_kinetic = half_square_integral(d.u);
  c.omega_p = lp_norm(d.omega, p);
  c.omega_inf = d.omega.max_abs();
  c.omega_inf_refined = refine_sup ? refined_sup(d.omega) : c.omega_inf;
  switch (s.kind) {
    case ModelKind::Euler:
      c.E_model = c.E_kinetic;
      break;
    case ModelKind::Boussinesq:
      c.E_model = c.E_kinetic + s.potential;
      break;
    case ModelKind::MHD_VorticityCurrent:
    case ModelKind::MHD_Elsasser:
      c.E_model = c.E_kinetic + half_square_integral(*d.B);
      c.cross_helicity = integral_of_product(d.u.x, d.B->x) + integral_of_product(d.u.y, d.B->y);
      break;
    case ModelKind::IIE: {
      const ScalarField mx = d.rho->times(d.u.x), my = d.rho->times(d.u.y);
      c.E_model = 0.5 * (integral_of_product(mx, d.u.x) + integral_of_product(my, d.u.y));
      c.momentum_x = mx.integral();
      c.momentum_y = my.integral();
      break;
    }
  }
  if (d.rho) {
    c.mass = d.rho->integral();
    c.rho_p = lp_norm(*d.rho, p);
  }
  return c;
}

// ---- initial data ----------------------------------------------------------

VorticityProfile parse_profile(const std::string& s) {
  if (s == "default" || s == "standard") return VorticityProfile::standard;
  if (s == "eigen") return VorticityProfile::eigen;
  if (s == "zero") return VorticityProfile::zero;
  if (s == "shear") return VorticityProfile::shear;
  throw ParameterError("unknown vorticity profile '" + s + "'");
}

std::string to_string(VorticityProfile p) {
  switch (p) {
    case VorticityProfile::standard: return "default";
    case VorticityProfile::eigen: return "eigen";
    case VorticityProfile::zero: return "zero";
    case VorticityProfile::shear: return "shear";
  }
  return "?";
}

DeltaNorm parse_delta_norm(const std::string& s) {
  if (s == "rho_w2p") return DeltaNorm::rho_w2p;
  if (s == "mu_w2p") return DeltaNorm::mu_w2p;
  if (s == "rho_w3p") return DeltaNorm::rho_w3p;
  throw ParameterError("unknown delta norm '" + s + "'");
}

std::string to_string(DeltaNorm n) {
  switch (n) {
    case DeltaNorm::rho_w2p: return "rho_w2p";
    case DeltaNorm::mu_w2p: return "mu_w2p";
    case DeltaNorm::rho_w3p: return "rho_w3p";
  }
  return "?";
}

DeltaNorm default_delta_norm(ModelKind k) {
  if (k == ModelKind::IIE) return DeltaNorm::mu_w2p;
  if (is_mhd(k)) return DeltaNorm::rho_w3p;
  return DeltaNorm::rho_w2p;
}

FluidState make_initial_state(ModelKind kind, const Grid& g, const InitialData& init) {
  ScalarField omega = [&] {
    switch (init.profile) {
      case VorticityProfile::standard:
        return ScalarField::from_function(
            g, [](double x, double y) { return std::sin(x) * std::sin(y) + 0.7 * std::cos(2 * x + y); });
      case VorticityProfile::eigen:
        return ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
      case VorticityProfile::zero:
        return ScalarField(g);
      case VorticityProfile::shear:
        return ScalarField::from_function(g, [](double, double y) { return std::cos(y); });
    }
    return ScalarField(g);
  }();

  const DeltaNorm norm = init.norm.value_or(default_delta_norm(kind));
  const ScalarField theta = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::cos(y); });
  const int order = norm == DeltaNorm::rho_w3p ? 3 : 2;
  const ScalarField pert = (init.delta / sobolev_norm(theta, order, init.p)) * theta;
  const ScalarField one = ScalarField::constant(g, 1.0);
  ScalarField rho = norm == DeltaNorm::mu_w2p ? (one + pert).map([](double v) {
    if (!(v > 0.0)) throw VacuumError("1 + delta*theta must stay positive");
    return 1.0 / v;
  })
                                              : one + pert;
  if (kind == ModelKind::Euler) rho = one;

  FluidState s{kind == ModelKind::MHD_Elsasser ? ModelKind::MHD_VorticityCurrent : kind, 0.0, omega, rho,
               ScalarField(g), ScalarField(g)};
  if (kind == ModelKind::Boussinesq) {
    const ScalarField y = ScalarField::from_function(g, [](double, double yy) { return yy; });
    s.potential = -integral_of_product(rho, y);
  }
  if (kind == ModelKind::IIE) reciprocal_density(rho);  // vacuum check
  return kind == ModelKind::MHD_Elsasser ? to_elsasser(s) : s;
}

}  // namespace fluidspan
