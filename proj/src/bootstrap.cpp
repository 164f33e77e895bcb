#include "fluidspan/bootstrap.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "fluidspan/errors.hpp"
#include "detail/stiff.hpp"

namespace fluidspan {

namespace ls = logspace;

namespace {

constexpr double kE = 2.718281828459045235;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be positive, got " + fmt(v));
}

}  // namespace

GrowthConstants growth_constants(double C) {
  if (!(C > kE)) throw HypothesisError("growth lemma needs C > e, got C = " + fmt(C));
  return {C, 1.0 + std::log1p(C), C, 2.0 * C, 5.0 * C};
}

double corrected_lambda1(double C) { return C * (1.0 + std::log1p(C)); }

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::generic_closure: return "generic_closure";
    case BoundKind::boussinesq: return "boussinesq";
    case BoundKind::iie_lifespan: return "iie_lifespan";
    case BoundKind::iie_continuation: return "iie_continuation";
    case BoundKind::mhd: return "mhd";
  }
  return "?";
}

LifespanBound::LifespanBound(BoundKind kind, double C0, double c1, double c2, double c3, double ln_delta0,
                             std::vector<double> zeta)
    : kind_(kind), C0_(C0), c1_(c1), c2_(c2), c3_(c3), ln_delta0_(ln_delta0), zeta_(std::move(zeta)) {
  require_positive(C0, "C0");
  require_positive(c1, "C1");
  require_positive(c2, "C2");
  require_positive(c3, "C3");
}

double LifespanBound::log10_delta0() const { return ls::to_log10(ln_delta0_); }

double LifespanBound::T(double delta) const {
  if (!(delta > 0.0)) throw DomainError("lifespan needs delta > 0, got " + fmt(delta), 1);
  return T_ln(std::log(delta));
}

double LifespanBound::T_ln(double ln_delta) const {
  const double l1 = std::log(C0_) - ln_delta;
  if (!(l1 > 0.0)) throw DomainError("log(C0/delta) = " + fmt(l1) + " is not positive", 1);
  const double l2 = std::log(l1 / c1_);
  if (!(l2 > 0.0)) throw DomainError("log(C1^-1 log(C0/delta)) = " + fmt(l2) + " is not positive", 2);
  return std::log(l2 / c2_) / c3_;
}

double LifespanBound::log_energy(double t) const { return c1_ * std::exp(c2_ * std::exp(c3_ * t)); }

double LifespanBound::budget(std::size_t j, double delta) const {
  if (j >= zeta_.size()) throw ParameterError("no budget component " + std::to_string(j));
  return zeta_[j] * C0_ / delta;
}

double LifespanBound::budget_certificate_error(double ln_delta) const {
  const double target = std::log(C0_) - ln_delta;
  return std::abs(log_energy(T_ln(ln_delta)) - target) / target;
}

LifespanBound closure_lifespan(const ClosureSpec& spec) {
  if (spec.kappa.empty() || spec.kappa.size() != spec.zeta.size())
    throw ParameterError("closure needs m >= 1 matching kappa and zeta entries");
  double kz = 0.0;
  for (std::size_t j = 0; j < spec.kappa.size(); ++j) {
    require_positive(spec.kappa[j], "kappa");
    if (!(spec.zeta[j] >= 1.0)) throw ParameterError("zeta_j must be >= 1, got " + fmt(spec.zeta[j]));
    kz = std::max(kz, spec.kappa[j] * spec.zeta[j]);
  }
  require_positive(spec.C1, "C1");
  require_positive(spec.C2, "C2");
  require_positive(spec.C3, "C3");
  const double C0 = 99.0 / (100.0 * kz);
  const double ln_d0 = std::log(C0) - spec.C1 * std::exp(2.0 * spec.C2);
  return LifespanBound(BoundKind::generic_closure, C0, spec.C1, spec.C2, spec.C3, ln_d0, spec.zeta);
}

LifespanBound boussinesq_bound(const GrowthConstants& L) {
  if (!(L.C > kE)) throw HypothesisError("Boussinesq bound needs C > e, got C = " + fmt(L.C));
  const double C0 = 99.0 / (100.0 * L.Lambda4);
  const double ln_d0 = std::log(C0) - L.Lambda3 * kE * kE;
  return LifespanBound(BoundKind::boussinesq, C0, L.Lambda3, 1.0, L.Lambda1, ln_d0, {L.Lambda4});
}

LifespanBound iie_bound(double C) {
  if (!(C >= 1.0)) throw HypothesisError("IIE bound needs C >= 1, got C = " + fmt(C));
  const auto L = growth_constants(9.0 * kE * kE * C);
  const double z = std::max(0.5, L.Lambda4);
  const double C0 = 99.0 / (100.0 * z);
  const double c1 = std::max(L.Lambda2, L.Lambda3);
  const double ln_d0 = std::log(C0) - c1 * kE * kE;
  return LifespanBound(BoundKind::iie_lifespan, C0, c1, 1.0, L.Lambda1, ln_d0, {z});
}

double IIEContinuation::log10_delta0_bound() const { return ls::to_log10(ln_delta0_bound); }

IIEContinuation iie_continuation_budget(double C) {
  if (!(C >= 1.0)) throw HypothesisError("IIE continuation needs C >= 1, got C = " + fmt(C));
  const double c0 = 3.0 / (100.0 * C);
  const double ln_bound = std::log(c0) - 12.0 * C * kE;
  const double ln_d0 = std::log(c0) - 12.0 * C * kE * kE;
  return {LifespanBound(BoundKind::iie_continuation, c0, 12.0 * C, 1.0, C, ln_d0), ln_bound};
}

MHDThresholdTerms mhd_threshold_terms(const MHDConstants& k, double ln_delta) {
  MHDThresholdTerms r{};
  r.alpha = std::log(k.C4p) - ln_delta;
  r.beta = std::log(r.alpha / k.C2);
  r.gamma = std::log(r.beta / 4.0);
  r.ln_f = std::log(k.C / k.C1) + ln_delta + std::log(r.gamma);
  r.f_prime = k.C / k.C1 * (r.gamma - 1.0 / (r.alpha * r.beta));
  return r;
}

MHDConstants mhd_constants(double C) {
  if (!(C >= 1.0)) throw HypothesisError("MHD constants need C >= 1, got C = " + fmt(C));
  MHDConstants k;
  k.C = C;
  k.C1 = 6.0 * C * C;
  k.C2 = kE * kE / 6.0;
  k.C3 = kE / (2.0 * kE * kE * kE * k.C1 * k.C2);
  k.C4 = 1.0 / (4.0 * C * C * kE * kE);
  k.C4p = 99.0 / (100.0 * k.C4);
  // δ₀ = C₄′exp(−C₂e^{4e²}); only its logarithm is representable
  k.ln_delta0 = std::log(k.C4p) - k.C2 * std::exp(4.0 * kE * kE);
  const auto t = mhd_threshold_terms(k, k.ln_delta0);
  k.alpha0 = t.alpha;
  k.beta0 = t.beta;
  k.gamma0 = t.gamma;
  k.ln_f_delta0 = t.ln_f;
  k.bound = LifespanBound(BoundKind::mhd, k.C4p, k.C2, 4.0, k.C1, k.ln_delta0);
  return k;
}

// ---- saturated systems -----------------------------------------------------

std::string to_string(SaturatedKind k) {
  switch (k) {
    case SaturatedKind::generic: return "generic";
    case SaturatedKind::boussinesq: return "boussinesq";
    case SaturatedKind::iie_relaxed: return "iie_relaxed";
    case SaturatedKind::mhd_simplified: return "mhd_simplified";
  }
  return "?";
}

bool SaturatedReport::all_hold() const {
  return std::all_of(envelopes.begin(), envelopes.end(), [](const EnvelopeCheck& e) { return e.holds(); });
}

namespace {

using State = std::vector<double>;

// State (log M, log N, v) with log(1+Q) = log N + v. Q/N relaxes towards a
// quasi-steady ratio at rate Ṅ/N, which reaches e^{40} and beyond, so the
// system is stiff and goes to an implicit stepper with this exact Jacobian.
// Rates are assembled in log space; only final values are exponentiated.
struct HierarchicalSystem {
  SaturatedKind kind;
  double C;

  struct Terms {
    double log_x, x, dx;  // x = Ṅ/N and dx/dm
    double mdot, dmdot;   // Ṁ/M and its m-derivative
    double r, dr_dm, dr_dn;  // r = log(Q̇/N)
  };

  double a() const {
    if (kind == SaturatedKind::boussinesq) return 2.0 * C;
    if (kind == SaturatedKind::iie_relaxed) return 9.0 * kE * kE * C;
    return C;
  }

  Terms terms(double m, double n) const {
    Terms t{};
    const double sig = 1.0 / (1.0 + std::exp(-m));  // d/dm log(1+e^m)
    const double kx = kind == SaturatedKind::boussinesq ? 2.0 : kind == SaturatedKind::iie_relaxed ? 6.0 : 1.0;
    t.log_x = std::log(kx * C) + ls::add(0.0, m);
    t.x = std::exp(t.log_x);
    t.dx = t.x * sig;
    const double shift = kind == SaturatedKind::boussinesq ? 2.0 : 1.0;  // log(2+x) vs log(1+x)
    t.mdot = a() * (1.0 + ls::add(std::log(shift), t.log_x));
    // x/(shift+x) written to stay finite for huge x
    t.dmdot = a() * sig / (1.0 + shift * std::exp(-t.log_x));
    if (kind == SaturatedKind::boussinesq) {
      // Q̇ = M + N
      t.r = ls::add(m - n, 0.0);
      const double w = std::exp(m - n - t.r);
      t.dr_dm = w;
      t.dr_dn = -w;
      return t;
    }
    const double la = std::log(a()), lm = std::log(t.mdot), g = t.dmdot / t.mdot;
    // a(Ṁ + NṀ/M) + MṀṄ/N [+ C(M+N)], each divided by N
    struct Term {
      double v, dm, dn;
    };
    std::vector<Term> T = {{la + m + lm - n, 1.0 + g, -1.0}, {la + lm, g, 0.0},
                           {2.0 * m + lm + t.log_x - n, 2.0 + g + sig, -1.0}};
    if (kind == SaturatedKind::generic) {
      T.push_back({la + m - n, 1.0, -1.0});
      T.push_back({la, 0.0, 0.0});
    }
    t.r = ls::kNegInf;
    for (const auto& x : T) t.r = ls::add(t.r, x.v);
    for (const auto& x : T) {
      const double w = std::exp(x.v - t.r);
      t.dr_dm += w * x.dm;
      t.dr_dn += w * x.dn;
    }
    return t;
  }
};

// State (log M, I = ∫Y, s, r) with log(1+∫Z) = CI + s and log(1+Q) = CI + r,
// again so that the huge common factor exp(CI) never enters a difference.
struct MHDSystem {
  double C, delta;

  double log_Y(double m) const { return ls::add(std::log(C), std::log(C * (kE * kE + kE + 1.0)) + m); }

  void operator()(const State& y, State& dy, double) const {
    const double m = y[0], s = y[2], r = y[3];
    const double lY = log_Y(m);
    const double Y = std::exp(lY);
    dy[0] = 2.0 * C * (1.0 + ls::add(0.0, lY));
    dy[1] = Y;
    dy[2] = C * std::exp(-s) - C * Y;  // Z/(1+∫Z) with Z = C e^{CI}
    dy[3] = delta > 0.0 ? std::exp(std::log(C * delta) + m + lY + s - r) - C * Y : -C * Y;
    for (double d : dy)
      if (!std::isfinite(d)) throw ConvergenceError("saturated MHD system left the finite range");
  }
};

void check(EnvelopeCheck& e, double t, double lhs, double rhs) {
  const double margin = rhs - lhs;
  if (margin < e.min_margin) {
    e.min_margin = margin;
    e.t_min_margin = t;
  }
  if (margin < 0.0 && !e.first_violation) {
    e.first_violation = t;
    e.lhs_at_violation = lhs;
    e.rhs_at_violation = rhs;
  }
}

EnvelopeCheck named(std::string name) {
  EnvelopeCheck e;
  e.name = std::move(name);
  return e;
}

// log of a value whose log is given, or −∞ when that value is ≤ 0
double safe_log(double v) { return v > 0.0 ? std::log(v) : ls::kNegInf; }

}  // namespace

SaturatedReport integrate_saturated_system(SaturatedKind kind, double C, double t_end, const SaturatedOptions& opt) {
  if (!(t_end > 0.0) || t_end > 5.0) throw ParameterError("t_end must lie in (0, 5], got " + fmt(t_end));
  if (opt.samples < 2) throw ParameterError("need at least two samples");
  SaturatedReport r;
  r.kind = kind;
  r.C = C;
  const bool mhd = kind == SaturatedKind::mhd_simplified;
  if (mhd) {
    if (!(C >= 1.0)) throw HypothesisError("MHD system needs C >= 1, got C = " + fmt(C));
  } else if (!(C > kE)) {
    throw HypothesisError("saturated growth system needs C > e, got C = " + fmt(C));
  }
  // The Boussinesq relaxed system fits the lemma with constant 2C(1+log 2),
  // the IIE one with 9e²C.
  if (kind == SaturatedKind::generic) r.lambda = growth_constants(C);
  if (kind == SaturatedKind::boussinesq) r.lambda = growth_constants(2.0 * C * (1.0 + std::log(2.0)));
  if (kind == SaturatedKind::iie_relaxed) r.lambda = growth_constants(9.0 * kE * kE * C);
  if (opt.lambda1) r.lambda.Lambda1 = *opt.lambda1;

  std::vector<double> times(opt.samples);
  for (int k = 0; k < opt.samples; ++k) times[k] = t_end * k / (opt.samples - 1);

  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = 1e-6 * t_end;

  if (!mhd) {
    const HierarchicalSystem hs{kind, C};
    auto rhs = [&](const State& y, State& dy) {
      const auto t = hs.terms(y[0], y[1]);
      dy[0] = t.mdot;
      dy[1] = t.x;
      dy[2] = t.x * std::expm1(t.r - t.log_x - y[2]);
      for (double d : dy)
        if (!std::isfinite(d)) throw ConvergenceError("saturated system left the finite range");
    };
    auto jac = [&](const State& y, State& J) {
      const auto t = hs.terms(y[0], y[1]);
      const double e = std::exp(t.r - y[2]);  // Q̇/(N e^v)
      J = {t.dmdot, 0.0, 0.0, t.dx, 0.0, 0.0, e * t.dr_dm - t.dx, e * t.dr_dn, -e};
    };
    // Once x = Ṅ/N is large, Q/N sits on its quasi-steady value e^r/x up to a
    // relative O(ẋ/x²) and the v equation is pure round-off; (m, n) do not
    // depend on Q, so they continue alone.
    constexpr double kQuasiSteady = 1e8;
    auto record = [&](double t, double m, double n, double v) {
      r.t.push_back(t);
      r.log_M.push_back(m);
      r.log_N.push_back(n);
      r.log1p_Q.push_back(n + v);
    };
    State last;
    const std::size_t seen = detail::integrate_stiff({0.0, 0.0, 0.0}, rhs, jac, times, dt0, opt.abs_tol, opt.rel_tol,
                                                     [&](const State& s, double t) {
                                                       record(t, s[0], s[1], s[2]);
                                                       last = s;
                                                       return hs.terms(s[0], s[1]).x < kQuasiSteady;
                                                     });
    if (seen < times.size()) {
      State y{last[0], last[1]};
      auto mn = [&](const State& z, State& dz, double) {
        const auto t = hs.terms(z[0], z[1]);
        dz[0] = t.mdot;
        dz[1] = t.x;
        if (!std::isfinite(t.x) || !std::isfinite(t.mdot))
          throw ConvergenceError("saturated system left the finite range");
      };
      std::vector<double> rest(times.begin() + seen - 1, times.end());
      bool first = true;
      odeint::integrate_times(stepper, mn, y, rest.begin(), rest.end(), dt0, [&](const State& z, double t) {
        if (first) {
          first = false;
          return;
        }
        const auto q = hs.terms(z[0], z[1]);
        record(t, z[0], z[1], q.r - q.log_x);
      });
    }
    const auto& L = r.lambda;
    EnvelopeCheck eM = named("log M <= e^(L1 t)");
    EnvelopeCheck eN = named("log log N <= log L2 + e^(L1 t)");
    EnvelopeCheck eQ = named("log log Q <= log(log L4 + L3 exp(e^(L1 t)))");
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      const double t = r.t[k];
      const double e1 = L.Lambda1 * t;  // log e^{Λ₁t}
      check(eM, t, r.log_M[k], std::exp(e1));
      check(eN, t, safe_log(r.log_N[k]), std::log(L.Lambda2) + std::exp(e1));
      const double log_Q = ls::log_from_log1p(r.log1p_Q[k]);
      // Q ≤ 1 sits below Λ₄ ≥ 1 trivially; compare one log further down otherwise
      if (log_Q > 0.0) {
        const double rhs = ls::add(std::log(std::log(L.Lambda4)), std::log(L.Lambda3) + std::exp(e1));
        check(eQ, t, std::log(log_Q), rhs);
      }
    }
    r.envelopes = {eM, eN, eQ};
    return r;
  }

  const auto k = mhd_constants(C);
  MHDSystem sys{C, opt.delta};
  State y{0.0, 0.0, 0.0, 0.0};
  std::vector<double> intY;
  odeint::integrate_times(stepper, sys, y, times.begin(), times.end(), dt0, [&](const State& s, double t) {
    r.t.push_back(t);
    r.log_M.push_back(s[0]);
    r.log_N.push_back(sys.log_Y(s[0]));
    r.log_Z.push_back(std::log(C) + C * s[1]);
    // with δ = 0, Q ≡ 0 and r tracks −CI exactly
    r.log1p_Q.push_back(opt.delta > 0.0 ? C * s[1] + s[3] : 0.0);
    intY.push_back(s[1]);
  });
  EnvelopeCheck eM = named("log M <= 2e^(C1 t)");
  EnvelopeCheck eY = named("log Y <= log(2Ce^2) + 2e^(C1 t)");
  EnvelopeCheck eZ = named("log log(Z/C) <= log C2 + 2e^(C1 t)");
  EnvelopeCheck eQ = named("log Q <= log(C4 delta) + C2 exp(4e^(C1 t))");
  for (std::size_t j = 0; j < r.t.size(); ++j) {
    const double t = r.t[j];
    const double two_e = 2.0 * std::exp(k.C1 * t);
    check(eM, t, r.log_M[j], two_e);
    check(eY, t, r.log_N[j], std::log(2.0 * C * kE * kE) + two_e);
    check(eZ, t, safe_log(C * intY[j]), std::log(k.C2) + two_e);
    if (opt.delta > 0.0)
      check(eQ, t, ls::log_from_log1p(r.log1p_Q[j]), std::log(k.C4 * opt.delta) + k.C2 * std::exp(2.0 * two_e));
  }
  r.envelopes = {eM, eY, eZ};
  if (opt.delta > 0.0) r.envelopes.push_back(eQ);
  return r;
}

// ---- monitor ----------------------------------------------------------------

std::string MonitorReport::T_emp_string() const {
  if (unconditional) return "unconditional";
  if (!T_emp) return "none";
  return fmt(*T_emp);
}

namespace {

std::optional<double> crossing(const std::vector<double>& t, const std::vector<double>& v, double thr) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] <= thr) continue;
    if (k == 0) return t[0];
    const double s = (thr - v[k - 1]) / (v[k] - v[k - 1]);
    return t[k - 1] + s * (t[k] - t[k - 1]);
  }
  return std::nullopt;
}

}  // namespace

MonitorReport bootstrap_monitor(const StretchingSeries& series, ModelKind model, double delta, double C_fit) {
  MonitorReport r;
  r.model = model;
  r.delta = delta;
  r.C_fit = C_fit;
  for (const auto& s : series.samples) r.t.push_back(s.t);

  auto add = [&](std::string name, double thr, auto&& quantity) {
    HypothesisComponent c{std::move(name), thr, {}, std::nullopt};
    for (const auto& s : series.samples) c.values.push_back(quantity(s));
    c.first_violation = crossing(r.t, c.values, thr);
    r.components.push_back(std::move(c));
  };
  auto opt = [](const std::optional<double>& v) { return v.value_or(0.0); };

  switch (model) {
    case ModelKind::Boussinesq:
      add("delta*Z", 1.0, [&](const StretchingSample& s) { return delta * opt(s.Z); });
      add("delta*Y", 1.0, [&](const StretchingSample& s) { return delta * opt(s.Y); });
      break;
    case ModelKind::IIE:
      add("C*delta*M", 0.5, [&](const StretchingSample& s) { return C_fit * delta * s.M; });
      add("C*delta*N", 0.5, [&](const StretchingSample& s) { return C_fit * delta * s.N; });
      add("delta*Q", 1.0, [&](const StretchingSample& s) { return delta * opt(s.Q); });
      break;
    case ModelKind::MHD_VorticityCurrent:
    case ModelKind::MHD_Elsasser:
      add("Q", 1.0, [&](const StretchingSample& s) { return opt(s.Q); });
      add("C*delta*t", 1.0, [&](const StretchingSample& s) { return C_fit * delta * s.t; });
      break;
    case ModelKind::Euler:
      break;
  }
  r.unconditional = delta == 0.0 || r.components.empty();
  if (!r.unconditional) {
    for (const auto& c : r.components)
      if (c.first_violation && (!r.T_emp || *c.first_violation < *r.T_emp)) r.T_emp = c.first_violation;
  }
  return r;
}

double calibrate_c_fit(const StretchingSeries& cal) {
  double c = 0.0;
  for (const auto& s : cal.samples) {
    const double x = s.N_dot / s.N;
    c = std::max(c, x / (1.0 + s.M));
    c = std::max(c, s.M_dot / (s.M * (1.0 + std::log1p(x))));
  }
  return std::max(c, std::nextafter(kE, 10.0));
}

LifespanBound lifespan_for_model(ModelKind model, double C_fit) {
  switch (model) {
    case ModelKind::Boussinesq: return boussinesq_bound(growth_constants(C_fit));
    case ModelKind::IIE: return iie_bound(C_fit);
    case ModelKind::MHD_VorticityCurrent:
    case ModelKind::MHD_Elsasser: return mhd_constants(C_fit).bound;
    case ModelKind::Euler: break;
  }
  throw ParameterError("no lifespan bound for model " + to_string(model));
}

}  // namespace fluidspan
