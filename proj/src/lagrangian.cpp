#include "fluidspan/lagrangian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fluidspan/kernels.hpp"

namespace fluidspan {

namespace {

constexpr std::size_t kComponents = 8;
enum : std::size_t { X1, X2, F11, F12, F21, F22, G1, G2 };

double wrap_diff(double d) { return d - kTwoPi * std::round(d / kTwoPi); }

double wrap(double x) {
  double r = std::fmod(x, kTwoPi);
  return r < 0.0 ? r + kTwoPi : r;
}

double trapezoid(double dt, double a, double b) { return 0.5 * dt * (a + b); }

double sum_w2p(const VectorField& v, double p) { return sobolev_norm(v.x, 2, p) + sobolev_norm(v.y, 2, p); }

}  // namespace

std::vector<std::vector<double>> interpolate(const std::vector<const ScalarField*>& fields, std::span<const double> xs,
                                             std::span<const double> ys) {
  std::vector<std::vector<double>> out(fields.size(), std::vector<double>(xs.size()));
  if (fields.empty()) return out;
  const Grid& g = fields.front()->grid();
  std::vector<const double*> in;
  std::vector<double*> dst;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    fields[f]->require_same_grid(*fields.front());
    in.push_back(fields[f]->values().data());
    dst.push_back(out[f].data());
  }
  kernels::interpolate_cubic(g.nx(), g.ny(), in, xs, ys, dst);
  return out;
}

// ---- ensemble ---------------------------------------------------------------

FlowMapEnsemble FlowMapEnsemble::identity(int m, double t0) {
  if (m < 4) throw ParameterError("flow map needs at least 4x4 particles");
  FlowMapEnsemble e;
  e.m = m;
  e.t = t0;
  const std::size_t n = static_cast<std::size_t>(m) * m;
  e.a1.resize(n);
  e.a2.resize(n);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      e.a1[static_cast<std::size_t>(j) * m + i] = kTwoPi * i / m;
      e.a2[static_cast<std::size_t>(j) * m + i] = kTwoPi * j / m;
    }
  e.x1 = e.a1;
  e.x2 = e.a2;
  e.f11.assign(n, 1.0);
  e.f12.assign(n, 0.0);
  e.f21.assign(n, 0.0);
  e.f22.assign(n, 1.0);
  e.g1.assign(n, 0.0);
  e.g2.assign(n, 0.0);
  return e;
}

double FlowMapEnsemble::label_spacing() const { return kTwoPi / m; }

double FlowMapEnsemble::max_det_error() const {
  double e = 0.0;
  for (std::size_t p = 0; p < size(); ++p) e = std::max(e, std::abs(f11[p] * f22[p] - f12[p] * f21[p] - 1.0));
  return e;
}

double FlowMapEnsemble::sup_grad_x() const { return kernels::max_opnorm2x2(f11, f12, f21, f22); }

double FlowMapEnsemble::sup_grad_a() const {
  // (∇X)⁻¹ = adj(F)/det F
  double s = 0.0;
  for (std::size_t p = 0; p < size(); ++p) {
    const double det = f11[p] * f22[p] - f12[p] * f21[p];
    const double b11 = f22[p] / det, b12 = -f12[p] / det, b21 = -f21[p] / det, b22 = f11[p] / det;
    const double fro = b11 * b11 + b12 * b12 + b21 * b21 + b22 * b22;
    const double d = b11 * b22 - b12 * b21;
    s = std::max(s, std::sqrt(0.5 * (fro + std::sqrt(std::max(fro * fro - 4.0 * d * d, 0.0)))));
  }
  return s;
}

// ---- advection --------------------------------------------------------------

FlowMapEnsemble advect_flow_map(const FlowMapEnsemble& ens, const KinematicsProvider& provider, double dt) {
  const std::size_t n = ens.size();
  using State = std::array<std::vector<double>, kComponents>;
  State y0;
  y0[X1] = ens.x1;
  y0[X2] = ens.x2;
  y0[F11] = ens.f11;
  y0[F12] = ens.f12;
  y0[F21] = ens.f21;
  y0[F22] = ens.f22;
  y0[G1] = ens.g1;
  y0[G2] = ens.g2;

  static constexpr double offsets[4] = {0.0, 0.5, 0.5, 1.0};
  static constexpr double weights[4] = {1.0, 2.0, 2.0, 1.0};
  State acc;
  for (std::size_t c = 0; c < kComponents; ++c) acc[c].assign(n, 0.0);
  State stage = y0;
  State k;
  for (std::size_t c = 0; c < kComponents; ++c) k[c].assign(n, 0.0);
  ParticleKinematics kin;
  for (int s = 0; s < 4; ++s) {
    if (s > 0)
      for (std::size_t c = 0; c < kComponents; ++c)
        for (std::size_t p = 0; p < n; ++p) stage[c][p] = y0[c][p] + offsets[s] * dt * k[c][p];
    provider(s, ens.t + offsets[s] * dt, stage[X1], stage[X2], kin);
    const bool forced = !kin.h1.empty();
    for (std::size_t p = 0; p < n; ++p) {
      const double a11 = stage[F11][p], a12 = stage[F12][p], a21 = stage[F21][p], a22 = stage[F22][p];
      k[X1][p] = kin.u1[p];
      k[X2][p] = kin.u2[p];
      // d/dt ∇X = ∇u(X) ∇X
      k[F11][p] = kin.g11[p] * a11 + kin.g12[p] * a21;
      k[F12][p] = kin.g11[p] * a12 + kin.g12[p] * a22;
      k[F21][p] = kin.g21[p] * a11 + kin.g22[p] * a21;
      k[F22][p] = kin.g21[p] * a12 + kin.g22[p] * a22;
      // d/dt G = (∇X)ᵀ ∇h(X)
      k[G1][p] = forced ? a11 * kin.h1[p] + a21 * kin.h2[p] : 0.0;
      k[G2][p] = forced ? a12 * kin.h1[p] + a22 * kin.h2[p] : 0.0;
    }
    for (std::size_t c = 0; c < kComponents; ++c)
      for (std::size_t p = 0; p < n; ++p) acc[c][p] += weights[s] * k[c][p];
  }
  FlowMapEnsemble r = ens;
  r.t = ens.t + dt;
  std::vector<double>* dst[] = {&r.x1, &r.x2, &r.f11, &r.f12, &r.f21, &r.f22, &r.g1, &r.g2};
  for (std::size_t c = 0; c < kComponents; ++c)
    for (std::size_t p = 0; p < n; ++p) (*dst[c])[p] = y0[c][p] + dt / 6.0 * acc[c][p];
  for (std::size_t p = 0; p < n; ++p)
    if (!std::isfinite(r.f11[p] + r.f12[p] + r.f21[p] + r.f22[p] + r.x1[p] + r.x2[p]))
      throw InstabilityError("non-finite flow-map Jacobian at particle " + std::to_string(p));
  return r;
}

std::optional<VectorField> forcing_gradient(ModelKind kind, const DerivedFields& d) {
  const Grid& g = d.omega.grid();
  switch (kind) {
    case ModelKind::Euler:
      return std::nullopt;
    case ModelKind::Boussinesq:
      return VectorField{ScalarField(g), ScalarField::constant(g, -1.0)};
    case ModelKind::IIE:
      return gradient(0.5 * (product(d.u.x, d.u.x) + product(d.u.y, d.u.y)));
    case ModelKind::MHD_VorticityCurrent:
    case ModelKind::MHD_Elsasser: {
      VectorField gj = gradient(*d.J);
      return VectorField{-1.0 * gj.x, -1.0 * gj.y};
    }
  }
  return std::nullopt;
}

void kinematics_from_fields(ModelKind kind, const DerivedFields& d, std::span<const double> xs,
                            std::span<const double> ys, ParticleKinematics& out) {
  const ScalarField a11 = derivative(d.u.x, 1, 0), a12 = derivative(d.u.x, 0, 1);
  const ScalarField a21 = derivative(d.u.y, 1, 0), a22 = derivative(d.u.y, 0, 1);
  const auto h = forcing_gradient(kind, d);
  std::vector<const ScalarField*> fields{&d.u.x, &d.u.y, &a11, &a12, &a21, &a22};
  if (h) {
    fields.push_back(&h->x);
    fields.push_back(&h->y);
  }
  auto v = interpolate(fields, xs, ys);
  out.u1 = std::move(v[0]);
  out.u2 = std::move(v[1]);
  out.g11 = std::move(v[2]);
  out.g12 = std::move(v[3]);
  out.g21 = std::move(v[4]);
  out.g22 = std::move(v[5]);
  if (h) {
    out.h1 = std::move(v[6]);
    out.h2 = std::move(v[7]);
  } else {
    out.h1.clear();
    out.h2.clear();
  }
}

FlowMapEnsemble advect_flow_map(const FlowMapEnsemble& ens, const StepRecord& record, double dt) {
  for (int s = 0; s < 4; ++s)
    if (!record.derived[s] || !record.stage[s]) throw PreconditionError("step record is missing stage data");
  if (std::abs(record.stage[0]->t - ens.t) > 1e-9 * (1.0 + std::abs(ens.t)))
    throw TimeMismatchError("flow map and fluid step start at different times");
  const ModelKind kind = record.stage[0]->kind;
  return advect_flow_map(
      ens,
      [&](int s, double, std::span<const double> xs, std::span<const double> ys, ParticleKinematics& out) {
        kinematics_from_fields(kind, *record.derived[s], xs, ys, out);
      },
      dt);
}

// ---- back-to-label ------------------------------------------------------------

BackToLabel back_to_label(const FlowMapEnsemble& ens, std::span<const double> xs, std::span<const double> ys,
                          int newton_steps) {
  const int m = ens.m;
  const std::size_t n = ens.size(), nq = xs.size();
  const double cell = kTwoPi / m;

  // bucket particles by wrapped position
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(m) * m);
  auto bucket_of = [&](double x) { return std::min(static_cast<int>(wrap(x) / cell), m - 1); };
  for (std::size_t p = 0; p < n; ++p)
    buckets[static_cast<std::size_t>(bucket_of(ens.x2[p])) * m + bucket_of(ens.x1[p])].push_back(p);

  BackToLabel out;
  out.a1.resize(nq);
  out.a2.resize(nq);
  std::vector<double> r1(nq), r2(nq), j11(nq), j12(nq), j21(nq), j22(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const int bx = bucket_of(xs[q]), by = bucket_of(ys[q]);
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (int radius = 1; radius <= m / 2 && (best == n || radius <= 2); ++radius) {
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          if (std::max(std::abs(dx), std::abs(dy)) != radius && radius > 1) continue;
          const int cx = ((bx + dx) % m + m) % m, cy = ((by + dy) % m + m) % m;
          for (std::size_t p : buckets[static_cast<std::size_t>(cy) * m + cx]) {
            const double d = std::hypot(wrap_diff(ens.x1[p] - xs[q]), wrap_diff(ens.x2[p] - ys[q]));
            if (d < best_d) {
              best_d = d;
              best = p;
            }
          }
        }
    }
    out.a1[q] = ens.a1[best];
    out.a2[q] = ens.a2[best];
    r1[q] = wrap_diff(ens.x1[best] - xs[q]);
    r2[q] = wrap_diff(ens.x2[best] - ys[q]);
    j11[q] = ens.f11[best];
    j12[q] = ens.f12[best];
    j21[q] = ens.f21[best];
    j22[q] = ens.f22[best];
  }

  // displacement and Jacobian over labels, periodic in a
  std::vector<double> d1(n), d2(n);
  for (std::size_t p = 0; p < n; ++p) {
    d1[p] = ens.x1[p] - ens.a1[p];
    d2[p] = ens.x2[p] - ens.a2[p];
  }
  const double* label_fields[] = {d1.data(), d2.data(), ens.f11.data(), ens.f12.data(), ens.f21.data(),
                                  ens.f22.data()};
  double* outs[] = {r1.data(), r2.data(), j11.data(), j12.data(), j21.data(), j22.data()};
  auto evaluate = [&] {
    kernels::interpolate_cubic(m, m, label_fields, out.a1, out.a2, outs);
    for (std::size_t q = 0; q < nq; ++q) {
      r1[q] = wrap_diff(out.a1[q] + r1[q] - xs[q]);
      r2[q] = wrap_diff(out.a2[q] + r2[q] - ys[q]);
    }
  };
  for (int it = 0; it < newton_steps; ++it) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double det = j11[q] * j22[q] - j12[q] * j21[q];
      out.a1[q] -= (j22[q] * r1[q] - j12[q] * r2[q]) / det;
      out.a2[q] -= (-j21[q] * r1[q] + j11[q] * r2[q]) / det;
    }
    evaluate();
  }
  for (std::size_t q = 0; q < nq; ++q) out.max_residual = std::max(out.max_residual, std::hypot(r1[q], r2[q]));
  return out;
}

BackToLabel back_to_label(const FlowMapEnsemble& ens, const Grid& g, int newton_steps) {
  std::vector<double> xs(g.size()), ys(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      xs[static_cast<std::size_t>(j) * g.nx() + i] = g.x(i);
      ys[static_cast<std::size_t>(j) * g.nx() + i] = g.y(j);
    }
  return back_to_label(ens, xs, ys, newton_steps);
}

// ---- series -------------------------------------------------------------------

void compute_stretching(StretchingSeries& series, const FluidState& state, const DerivedFields& d,
                        const FlowMapEnsemble* ens) {
  const double tol = 1e-9 * (1.0 + std::abs(state.t));
  if (!series.samples.empty() && state.t < series.samples.back().t + tol)
    throw TimeMismatchError("stretching samples must advance in time");
  if (ens && std::abs(ens->t - state.t) > tol) throw TimeMismatchError("flow map and state are at different times");
  const StretchingParams& prm = series.params;
  const double p = prm.p;

  StretchingSample s;
  s.t = state.t;
  s.grad_u_inf = gradient_opnorm_sup(d.u);
  for (const ScalarField* c : {&d.u.x, &d.u.y})
    s.grad_u_w1p += sobolev_norm(derivative(*c, 1, 0), 1, p) + sobolev_norm(derivative(*c, 0, 1), 1, p);
  s.omega_inf = d.omega.max_abs();
  s.omega_w1p = sobolev_norm(d.omega, 1, p);
  s.u_inf = d.u.max_norm();
  s.u_w2p = sum_w2p(d.u, p);
  if (d.rho) s.rho_w2p = sobolev_norm(*d.rho, 2, p);
  if (d.B) s.B_w2p = sum_w2p(*d.B, p);

  if (auto h = forcing_gradient(state.kind, d)) {
    s.K0 = h->max_norm();
    for (const ScalarField* c : {&h->x, &h->y}) s.Kp += lp_norm(derivative(*c, 1, 0), p) + lp_norm(derivative(*c, 0, 1), p);
  }

  if (series.samples.empty()) {
    s.M = s.N = 1.0;
  } else {
    const StretchingSample& prev = series.samples.back();
    const double dt = s.t - prev.t;
    s.M = prev.M * std::exp(prm.C_M * trapezoid(dt, prev.grad_u_inf, s.grad_u_inf));
    s.N = prev.N * std::exp(prm.C_N * trapezoid(dt, prev.grad_u_w1p, s.grad_u_w1p));
    s.U = prev.U + trapezoid(dt, prev.omega_inf, s.omega_inf);
    s.W_integral = prev.W_integral;
  }
  s.M_dot = prm.C_M * s.grad_u_inf * s.M;
  s.N_dot = prm.C_N * s.grad_u_w1p * s.N;
  if (!series.samples.empty()) {
    const StretchingSample& prev = series.samples.back();
    auto w = [](const StretchingSample& x) { return (x.M + x.N) * x.K0 + x.M * x.M * x.Kp; };
    s.W_integral += trapezoid(s.t - prev.t, w(prev), w(s));
  }

  if (ens) {
    s.M_measured = std::max(ens->sup_grad_x(), ens->sup_grad_a());
    s.detJ_err = ens->max_det_error();
    s.chord_arc_ok = prm.C_M != 1.0 || *s.M_measured <= s.M * (1.0 + 1e-3);
  }
  series.samples.push_back(s);
}

void compute_memory(StretchingSeries& series, const FluidState& state, const DerivedFields& d) {
  if (series.samples.empty() || std::abs(series.samples.back().t - state.t) > 1e-9 * (1.0 + std::abs(state.t)))
    throw TimeMismatchError("memory terms need the stretching sample at the same time");
  StretchingSample& s = series.samples.back();
  const StretchingSample* prev = series.samples.size() >= 2 ? &series.samples[series.samples.size() - 2] : nullptr;
  const double dt = prev ? s.t - prev->t : 0.0;
  const double p = series.params.p;
  switch (series.kind) {
    case ModelKind::Euler:
      break;
    case ModelKind::Boussinesq:
      s.Y = prev ? *prev->Y + trapezoid(dt, prev->M + prev->N, s.M + s.N) : 0.0;
      s.Z = prev ? *prev->Z + trapezoid(dt, prev->M, s.M) : 0.0;
      break;
    case ModelKind::IIE: {
      auto qdot = [&](const StretchingSample& x) {
        return (x.M_dot + x.N * x.M_dot / x.M) * x.u_inf + x.M * x.M_dot * x.N_dot / x.N;
      };
      s.Q = prev ? *prev->Q + trapezoid(dt, qdot(*prev), qdot(s)) : 0.0;
      break;
    }
    case ModelKind::MHD_VorticityCurrent:
    case ModelKind::MHD_Elsasser: {
      auto [xi, eta] = elsasser_transform(d.omega, *d.J);
      s.Y = sobolev_norm(xi, 1, p) + sobolev_norm(eta, 1, p);
      s.Z = sobolev_norm(xi, 2, p) + sobolev_norm(eta, 2, p);
      auto qdot = [](const StretchingSample& x) { return x.u_w2p * x.B_w2p.value_or(0.0); };
      s.Q = prev ? *prev->Q + trapezoid(dt, qdot(*prev), qdot(s)) : 0.0;
      break;
    }
  }
}

std::optional<std::size_t> first_monotonicity_violation(const StretchingSeries& s) {
  for (std::size_t i = 1; i < s.samples.size(); ++i) {
    const auto &a = s.samples[i - 1], &b = s.samples[i];
    auto dec = [](const std::optional<double>& x, const std::optional<double>& y) { return x && y && *y < *x; };
    if (b.M < a.M || b.N < a.N || dec(a.Q, b.Q)) return i;
    if (s.monotone_memory() && (dec(a.Y, b.Y) || dec(a.Z, b.Z))) return i;
  }
  return std::nullopt;
}

// ---- Duhamel and lemma checks --------------------------------------------------

ScalarField duhamel_vorticity(const FlowMapEnsemble& ens, const FluidState& state0, int newton_steps) {
  if (ens.m < 8) throw ReconstructionError("Duhamel reconstruction needs at least 8x8 particles");
  const FluidState s0 = state0.kind == ModelKind::MHD_Elsasser ? to_vorticity_current(state0) : state0;
  const Grid& g = s0.grid();
  const ScalarField rx = derivative(s0.rho, 1, 0), ry = derivative(s0.rho, 0, 1);
  auto at_labels = interpolate({&s0.omega, &rx, &ry}, ens.a1, ens.a2);
  // W(a) = ω₀ − ∇⊥ρ₀·G = ω₀ + ∂yρ₀ G₁ − ∂xρ₀ G₂
  std::vector<double> w(ens.size());
  for (std::size_t p = 0; p < ens.size(); ++p)
    w[p] = at_labels[0][p] + at_labels[2][p] * ens.g1[p] - at_labels[1][p] * ens.g2[p];
  const BackToLabel A = back_to_label(ens, g, newton_steps);
  if (A.max_residual > 2.0 * std::max(g.dx(), g.dy()))
    throw ReconstructionError("back-to-label map did not converge (residual " + std::to_string(A.max_residual) + ")");
  std::vector<double> out(g.size());
  const double* in[] = {w.data()};
  double* dst[] = {out.data()};
  kernels::interpolate_cubic(ens.m, ens.m, in, A.a1, A.a2, dst);
  return ScalarField(g, std::move(out));
}

double omega_w1p_bound_shape(const StretchingSample& s, double delta) {
  return 1.0 + s.M + delta * s.M * s.W_integral;
}

double rho_w2p_bound_shape(const StretchingSample& s, double delta) {
  return 1.0 + delta * (s.M + s.N + s.M * s.M);
}

FittedConstants fit_lemma_constants(const StretchingSeries& cal) {
  FittedConstants c{0.0, 0.0};
  for (const auto& s : cal.samples) {
    c.omega = std::max(c.omega, s.omega_w1p / omega_w1p_bound_shape(s, cal.delta));
    if (s.rho_w2p) c.rho = std::max(c.rho, *s.rho_w2p / rho_w2p_bound_shape(s, cal.delta));
  }
  return c;
}

TransportLemmaReport check_transport_lemma(const FlowMapEnsemble& ens, const FluidState& state0,
                                           const StretchingSeries& series, const FittedConstants& c) {
  const FluidState s0 = state0.kind == ModelKind::MHD_Elsasser ? to_vorticity_current(state0) : state0;
  const ScalarField rx = derivative(s0.rho, 1, 0), ry = derivative(s0.rho, 0, 1);
  auto v = interpolate({&rx, &ry}, ens.x1, ens.x2);
  const double p = series.params.p;
  const double area = std::pow(ens.label_spacing(), 2);
  const double supF = ens.sup_grad_x();
  double lhs_p = 0.0, rhs_p = 0.0, lhs_inf = 0.0, rhs_inf = 0.0;
  for (std::size_t q = 0; q < ens.size(); ++q) {
    // ∇(ρ₀∘X)(a) = (∇X)ᵀ ∇ρ₀(X(a)); by area preservation the label quadrature of |∇ρ₀(X)|^p is ‖∇ρ₀‖_p^p
    const double t1 = ens.f11[q] * v[0][q] + ens.f21[q] * v[1][q];
    const double t2 = ens.f12[q] * v[0][q] + ens.f22[q] * v[1][q];
    const double l = std::hypot(t1, t2), r = std::hypot(v[0][q], v[1][q]);
    lhs_p += std::pow(l, p);
    rhs_p += std::pow(r, p);
    lhs_inf = std::max(lhs_inf, l);
    rhs_inf = std::max(rhs_inf, r);
  }
  TransportLemmaReport rep;
  rep.transport_p = {std::pow(lhs_p * area, 1.0 / p), supF * std::pow(rhs_p * area, 1.0 / p)};
  rep.transport_inf = {lhs_inf, supF * rhs_inf};
  if (!series.samples.empty()) {
    const StretchingSample& s = series.samples.back();
    rep.omega_w1p = {s.omega_w1p, c.omega * omega_w1p_bound_shape(s, series.delta)};
    if (s.rho_w2p) rep.rho_w2p = InequalityMargin{*s.rho_w2p, c.rho * rho_w2p_bound_shape(s, series.delta)};
  }
  return rep;
}

}  // namespace fluidspan
