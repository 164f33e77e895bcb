// Acceptance criteria shared by `fluidspan verify` and the acceptance test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fluidspan/harness.hpp"

namespace fluidspan {

namespace {

constexpr double kE = 2.718281828459045235;
constexpr double kLog2 = 0.693147180559945309;

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double l2(const ScalarField& f) { return std::sqrt(f.times(f).integral()); }
double rel_l2(const ScalarField& a, const ScalarField& b) { return l2(a - b) / l2(b); }

// Tracks the largest relative error over a set of named checks.
struct Tally {
  double worst = 0.0;
  std::string where;
  bool ok = true;
  void check(const std::string& name, double err, double tol) {
    if (err > worst || !std::isfinite(err)) {
      worst = err;
      where = name;
    }
    if (!(err <= tol)) ok = false;
  }
};

// Largest Kato ratio seen by any criterion.
struct KatoTracker {
  double sup = 0.0;
  std::string where;
  void observe(double v, const std::string& w) {
    if (v > sup) {
      sup = v;
      where = w;
    }
  }
};

CriterionResult exact_constants() {
  Tally t;
  for (double C : {3.0, 5.0, 10.0, 100.0}) {
    const auto L = growth_constants(C);
    t.check("Lambda1", rel(L.Lambda1, 1.0 + std::log1p(C)), 1e-12);
    t.check("Lambda2", rel(L.Lambda2, C), 1e-12);
    t.check("Lambda3", rel(L.Lambda3, 2.0 * C), 1e-12);
    t.check("Lambda4", rel(L.Lambda4, 5.0 * C), 1e-12);
  }
  const std::vector<ClosureSpec> specs = {{{1.0}, {1.0}, 1.0, 1.0, 1.0},
                                          {{2.0, 0.5}, {1.0, 3.0}, 0.5, 2.0, 3.0},
                                          {{0.1, 4.0, 1.0}, {2.0, 1.0, 5.0}, 2.0, 0.25, 0.5},
                                          {{7.0}, {1.5}, 3.0, 1.5, 10.0}};
  for (const auto& s : specs) {
    const auto b = closure_lifespan(s);
    double mk = 0.0;
    for (std::size_t j = 0; j < s.kappa.size(); ++j) mk = std::max(mk, s.kappa[j] * s.zeta[j]);
    const double C0 = 99.0 / (100.0 * mk);
    t.check("closure C0", rel(b.C0(), C0), 1e-12);
    t.check("closure ln delta0", rel(b.ln_delta0(), std::log(C0) - s.C1 * std::exp(2.0 * s.C2)), 1e-12);
    t.check("closure T(delta0)", rel(b.T_ln(b.ln_delta0()), kLog2 / s.C3), 1e-12);
  }
  const auto unit = closure_lifespan(specs[0]);
  const bool printed = std::abs(unit.T_ln(unit.ln_delta0()) - 0.693147) < 5e-7;
  for (double C : {3.0, 5.0, 10.0}) {
    const auto L = growth_constants(C);
    const auto b = boussinesq_bound(L);
    t.check("Boussinesq C0", rel(b.C0(), 99.0 / (100.0 * L.Lambda4)), 1e-12);
    t.check("Boussinesq T(delta0)", rel(b.T_ln(b.ln_delta0()), kLog2 / L.Lambda1), 1e-12);
  }
  for (double C : {1.0, 2.0, 5.0}) {
    const auto k = iie_continuation_budget(C);
    t.check("IIE continuation delta0", rel(k.ln_delta0_bound, std::log(3.0 / (100.0 * C)) - 12.0 * C * kE), 1e-12);
    t.check("IIE continuation U(delta0)", std::abs(k.U_budget.T_ln(k.ln_delta0_bound)), 1e-12);
  }
  bool certificate = true;
  double log10_d0 = 0.0;
  for (double C : {1.0, 2.0, 4.0}) {
    const auto k = mhd_constants(C);
    t.check("MHD C2", rel(k.C2, kE * kE / 6.0), 1e-12);
    t.check("MHD C4", rel(k.C4, 1.0 / (4.0 * C * C * kE * kE)), 1e-12);
    t.check("MHD gamma(delta0)", rel(k.gamma0, 2.0), 1e-12);
    t.check("MHD ln delta0", rel(k.ln_delta0, std::log(0.99 / k.C4) - k.C2 * std::exp(4.0 * kE * kE)), 1e-12);
    certificate = certificate && k.certificate();
    if (C == 1.0) log10_d0 = k.bound.log10_delta0();
  }
  const bool range = log10_d0 < -3.6e12 && log10_d0 > -3.8e12;
  return {"exact_constants", t.ok && certificate && range && printed,
          "worst rel err " + sci(t.worst) + " (" + t.where + "), MHD f(delta0) < 1: " + (certificate ? "yes" : "no") +
              ", MHD log10 delta0 (C=1) = " + sci(log10_d0)};
}

std::vector<CriterionResult> envelope_domination() {
  std::ostringstream d, di;
  bool ok = true, ok_star = true;
  for (double C : {3.0, 5.0, 10.0}) {
    const auto r = integrate_saturated_system(SaturatedKind::generic, C, 0.5);
    double worst = logspace::kInf;
    std::optional<double> first;
    for (const auto& e : r.envelopes) {
      worst = std::min(worst, e.min_margin);
      if (e.first_violation && (!first || *e.first_violation < *first)) first = e.first_violation;
    }
    ok = ok && r.all_hold();
    d << "C=" << C << ": min margin " << sci(worst);
    if (first) d << ", first violation t=" << sci(*first);
    d << "; ";

    SaturatedOptions opt;
    opt.lambda1 = corrected_lambda1(C);
    const auto s = integrate_saturated_system(SaturatedKind::generic, C, 0.5, opt);
    double worst_s = logspace::kInf;
    for (const auto& e : s.envelopes) worst_s = std::min(worst_s, e.min_margin);
    ok_star = ok_star && s.all_hold();
    di << "C=" << C << ": min margin " << sci(worst_s) << "; ";
  }
  return {{"envelope_domination", ok, d.str()},
          {"envelope_domination_corrected_rate", ok_star,
           "rate C(1+log(1+C)) in place of 1+log(1+C): " + di.str(), 0.0, true}};
}

CriterionResult euler_steadiness(KatoTracker& kato) {
  Grid g(128, 128);
  const auto s0 = make_initial_state(ModelKind::Euler, g, {VorticityProfile::eigen});
  auto s = s0;
  for (int i = 0; i < 1000; ++i) s = step(s, 1e-3);
  const double drift = rel_l2(s.omega, s0.omega);
  kato.observe(kato_ratio(s.omega), "euler_steadiness");
  return {"euler_steadiness", drift <= 1e-8 && std::abs(s.t - 1.0) < 1e-12,
          "relative L2 drift " + sci(drift) + " at t = 1 (128^2, dt = 1e-3)"};
}

CriterionResult conservation(int n, double t_end, KatoTracker& kato) {
  Grid g(n, n);
  Tally t;
  std::ostringstream d;
  d << n << "^2, t = " << t_end << ": ";
  for (auto kind : {ModelKind::Euler, ModelKind::Boussinesq, ModelKind::MHD_VorticityCurrent, ModelKind::IIE}) {
    auto s = make_initial_state(kind, g, {VorticityProfile::standard, kind == ModelKind::Euler ? 0.0 : 0.1});
    const auto c0 = conserved_quantities(s);
    kato.observe(kato_ratio(s.omega), "conservation");
    while (s.t < t_end - 1e-12) {
      const double dt = std::min({0.9 * cfl_limit(s), 0.05, t_end - s.t});
      s = step(s, dt);
    }
    kato.observe(kato_ratio(s.omega), "conservation");
    const auto c1 = conserved_quantities(s);
    const std::string m = to_string(kind);
    const double eE = rel(c1.E_model, c0.E_model);
    t.check(m + " E_model", eE, 1e-4);
    d << m << " E " << sci(eE);
    switch (kind) {
      case ModelKind::Euler: {
        const double ep = rel(c1.omega_p, c0.omega_p), ei = rel(c1.omega_inf_refined, c0.omega_inf_refined);
        t.check(m + " omega_p", ep, 1e-4);
        t.check(m + " omega_inf", ei, 1e-4);
        d << ", omega_p " << sci(ep) << ", omega_inf " << sci(ei);
        break;
      }
      case ModelKind::Boussinesq: {
        const double er = rel(*c1.rho_p, *c0.rho_p);
        t.check(m + " rho_p", er, 1e-4);
        d << ", rho_p " << sci(er);
        break;
      }
      case ModelKind::MHD_VorticityCurrent:
      case ModelKind::MHD_Elsasser: {
        // the initial cross-helicity is zero to round-off, so the change is
        // measured against the model energy
        const double eh = std::abs(*c1.cross_helicity - *c0.cross_helicity) / std::abs(c0.E_model);
        t.check(m + " cross_helicity", eh, 1e-4);
        d << ", cross-helicity " << sci(eh);
        break;
      }
      case ModelKind::IIE: {
        const double er = rel(*c1.rho_p, *c0.rho_p);
        const double mom = std::hypot(*c1.momentum_x, *c1.momentum_y) / g.area();
        t.check(m + " rho_p", er, 1e-4);
        t.check(m + " mean momentum", mom, 1e-9);
        d << ", rho_p " << sci(er) << ", |mean rho u| " << sci(mom);
        break;
      }
    }
    d << "; ";
  }
  return {"conservation", t.ok, d.str() + "worst: " + t.where};
}

CriterionResult mhd_equivalence(KatoTracker& kato) {
  Grid g(128, 128);
  auto vc = make_initial_state(ModelKind::MHD_VorticityCurrent, g, {VorticityProfile::standard, 0.1});
  auto el = to_elsasser(vc);
  // both carriers take the same steps, set by the vorticity-current state
  while (vc.t < 1.0 - 1e-12) {
    const double dt = std::min({0.9 * cfl_limit(vc), 0.05, 1.0 - vc.t});
    vc = step(vc, dt);
    el = step(el, dt);
  }
  const auto back = to_vorticity_current(el);
  const double ew = rel_l2(back.omega, vc.omega), er = rel_l2(back.rho, vc.rho);
  const double ej = rel_l2(laplacian(back.rho), laplacian(vc.rho));
  kato.observe(kato_ratio(vc.omega), "mhd_equivalence");
  const double worst = std::max({ew, er, ej});
  return {"mhd_equivalence", worst <= 1e-6 && std::abs(el.t - vc.t) < 1e-12,
          "t = 1, 128^2: omega " + sci(ew) + ", potential " + sci(er) + ", current " + sci(ej)};
}

CriterionResult elliptic() {
  Tally t;
  Grid g(128, 128);
  const auto qstar = ScalarField::from_function(g, [](double x, double y) { return std::sin(x + y) + 0.3 * std::cos(2 * y); });
  const auto mu = ScalarField::from_function(g, [](double x, double y) { return 1.0 + 0.05 * std::sin(x) * std::cos(y); });
  for (auto m : {EllipticMethod::fixed_point, EllipticMethod::preconditioned_cg}) {
    EllipticOptions opt;
    opt.method = m;
    const auto sol = solve_variable_poisson(mu, variable_laplacian(mu, qstar), opt);
    t.check("manufactured (" + to_string(m) + ")", rel_l2(sol.q, qstar), 1e-8);
  }
  const auto w = ScalarField::from_function(g, [](double x, double y) { return std::sin(x) * std::sin(y) + 0.7 * std::cos(2 * x + y); });
  const auto one = ScalarField::constant(g, 1.0);
  const auto u1 = recover_velocity_iie(one, w);
  const auto ub = biot_savart(w);
  const double reduction = std::max((u1.x - ub.x).max_abs(), (u1.y - ub.y).max_abs());
  t.check("rho = 1 reduction", reduction, 0.0);
  const auto rho = one + 0.1 * ScalarField::from_function(g, [](double x, double y) { return std::cos(x) * std::sin(2 * y); });
  const auto u = recover_velocity_iie(rho, w);
  const double res = (curl({rho.times(u.x), rho.times(u.y)}) - w).max_abs() / w.max_abs();
  t.check("curl(rho u) = omega", res, 1e-8);
  return {"elliptic", t.ok,
          "worst " + sci(t.worst) + " (" + t.where + "); rho = 1 difference " + sci(reduction) + ", curl residual " + sci(res)};
}

CriterionResult flow_map(KatoTracker& kato) {
  double det = 0.0;
  bool chord = true;
  double chord_ratio = 0.0;
  for (auto [kind, delta] : {std::pair{ModelKind::Euler, 0.0}, std::pair{ModelKind::Boussinesq, 0.1}}) {
    RunConfig c;
    c.model = kind;
    c.delta = delta;
    c.nx = c.ny = 128;
    c.t_end = 1.0;
    c.particle_m = 64;
    const auto r = simulate(c);
    if (r.unstable) return {"flow_map", false, r.termination};
    kato.observe(r.kato_sup, "flow_map");
    for (const auto& s : r.series.samples) {
      det = std::max(det, s.detJ_err.value_or(0.0));
      chord = chord && s.chord_arc_ok;
      chord_ratio = std::max(chord_ratio, *s.M_measured / s.M);
    }
  }
  // steady shear ω = cos y: X = (a₁ + t u₁(a₂), a₂)
  RunConfig c;
  c.model = ModelKind::Euler;
  c.seed_profile = VorticityProfile::shear;
  c.nx = c.ny = 128;
  c.t_end = 1.0;
  c.particle_m = 32;
  const auto r = simulate(c);
  const auto u = biot_savart(r.initial.omega);
  const double amp = u.x(0, 128 / 4);  // u₁ at y = π/2
  const auto& e = *r.ensemble;
  double shear = 0.0;
  for (std::size_t p = 0; p < e.size(); ++p) {
    shear = std::max(shear, std::abs(e.x1[p] - (e.a1[p] + amp * std::sin(e.a2[p]))));
    shear = std::max(shear, std::abs(e.x2[p] - e.a2[p]));
    shear = std::max(shear, std::abs(e.f12[p] - amp * std::cos(e.a2[p])));
    shear = std::max(shear, std::abs(e.f11[p] - 1.0) + std::abs(e.f21[p]) + std::abs(e.f22[p] - 1.0));
  }
  const bool ok = det <= 1e-4 && chord && chord_ratio <= 1.0 + 1e-3 && shear <= 1e-6 && std::abs(std::abs(amp) - 1.0) < 1e-12;
  return {"flow_map", ok,
          "max |det - 1| " + sci(det) + ", max M_measured/M " + sci(chord_ratio) + ", shear closed-form error " + sci(shear)};
}

CriterionResult duhamel(KatoTracker& kato) {
  RunConfig c;
  c.model = ModelKind::Boussinesq;
  c.delta = 0.1;
  c.nx = c.ny = 128;
  c.t_end = 1.0;
  c.particle_m = 128;
  const auto r = simulate(c);
  if (r.unstable) return {"duhamel", false, r.termination};
  kato.observe(r.kato_sup, "duhamel");
  const double err = rel_l2(duhamel_vorticity(*r.ensemble, r.initial), r.final_state.omega);
  return {"duhamel", err <= 1e-2, "relative L2 mismatch " + sci(err) + " (Boussinesq, delta = 0.1, t = 1, 128^2, m = 128)"};
}

CriterionResult sweep_monotonicity(KatoTracker& kato) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("fluidspan_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  bool ok = true;
  std::ostringstream d;
  for (auto kind : {ModelKind::Boussinesq, ModelKind::IIE}) {
    RunConfig c;
    c.model = kind;
    c.nx = c.ny = 128;
    c.t_end = 8.0;
    c.particle_m = 16;
    c.emit_svg = false;
    const auto res = cmd_sweep(c, {1e-1, 1e-2, 1e-3, 1e-4}, dir / to_string(kind));
    const bool mono = sweep_monotone(res);
    bool window = true;
    int theory_defined = 0;
    d << to_string(kind) << " (C_fit " << sci(res.C_fit) << "): T_emp";
    for (const auto& row : res.rows) {
      d << ' ' << row.T_emp;
      window = window && row.hypothesis_on_theory_window;
      if (row.T_theory) ++theory_defined;
      kato.observe(row.kato_sup, "delta_sweep_monotonicity");
      if (row.termination != "completed") ok = false;
    }
    d << (mono ? " nondecreasing" : " NOT monotone") << ", T_theory defined for " << theory_defined << "/4 deltas";
    if (theory_defined == 0 && !res.rows.empty()) d << " (" << res.rows.front().theory_note << ")";
    d << ", H on theory window " << (window ? "holds" : "violated") << "; ";
    ok = ok && mono && window;
  }
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return {"delta_sweep_monotonicity", ok, d.str()};
}

template <class F>
void timed(const std::string& name, std::vector<CriterionResult>& out,
           const std::function<void(const CriterionResult&)>& report, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CriterionResult> rs;
  try {
    if constexpr (std::is_same_v<decltype(f()), CriterionResult>) rs.push_back(f());
    else rs = f();
  } catch (const std::exception& e) {
    rs.push_back({name, false, std::string("raised: ") + e.what()});
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& r : rs) {
    r.seconds = sec;
    if (report) report(r);
    out.push_back(std::move(r));
  }
}

}  // namespace

std::vector<std::string> acceptance_criteria() {
  return {"exact_constants", "envelope_domination", "euler_steadiness", "conservation", "mhd_equivalence",
          "elliptic", "flow_map", "duhamel", "delta_sweep_monotonicity", "kato_ratio"};
}

std::vector<CriterionResult> run_acceptance(Suite suite, const std::function<void(const CriterionResult&)>& report,
                                            const std::vector<std::string>& only) {
  std::vector<CriterionResult> out;
  KatoTracker kato;
  auto want = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  if (want("exact_constants")) timed("exact_constants", out, report, [] { return exact_constants(); });
  if (want("envelope_domination")) timed("envelope_domination", out, report, [] { return envelope_domination(); });
  if (want("euler_steadiness")) timed("euler_steadiness", out, report, [&] { return euler_steadiness(kato); });
  if (want("conservation")) {
    // 128² cannot hold ‖ω‖∞ to 1e-4 past t ≈ 3, so the fast suite stops there
    timed("conservation", out, report, [&] {
      return suite == Suite::full ? conservation(256, 5.0, kato) : conservation(128, 3.0, kato);
    });
  }
  if (want("mhd_equivalence")) timed("mhd_equivalence", out, report, [&] { return mhd_equivalence(kato); });
  if (want("elliptic")) timed("elliptic", out, report, [] { return elliptic(); });
  if (want("flow_map")) timed("flow_map", out, report, [&] { return flow_map(kato); });
  if (want("duhamel")) timed("duhamel", out, report, [&] { return duhamel(kato); });
  if (want("delta_sweep_monotonicity")) timed("delta_sweep_monotonicity", out, report, [&] { return sweep_monotonicity(kato); });
  if (want("kato_ratio")) {
    // the sup covers every criterion that ran before this one
    CriterionResult r{"kato_ratio", kato.sup <= 10.0,
                      "sup = " + sci(kato.sup) + (kato.where.empty() ? "" : " (in " + kato.where + ")")};
    if (report) report(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace fluidspan
