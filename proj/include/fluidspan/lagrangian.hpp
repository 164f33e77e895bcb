#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fluidspan/models.hpp"

namespace fluidspan {

/// Periodic cubic interpolation of grid fields at scattered points.
std::vector<std::vector<double>> interpolate(const std::vector<const ScalarField*>& fields, std::span<const double> xs,
                                             std::span<const double> ys);

/// Particles seeded on an m x m label grid. Positions are unwrapped, so
/// X − a is periodic in a. F = ∇X with F_ij = ∂X_i/∂a_j. G is the running
/// Duhamel history ∫ Fᵀ ∇h(X) dτ with h = ∂_ρE.
struct FlowMapEnsemble {
  int m = 0;
  double t = 0.0;
  std::vector<double> a1, a2;
  std::vector<double> x1, x2;
  std::vector<double> f11, f12, f21, f22;
  std::vector<double> g1, g2;

  static FlowMapEnsemble identity(int m, double t0 = 0.0);
  std::size_t size() const { return a1.size(); }
  double label_spacing() const;
  double max_det_error() const;
  /// sup over particles of |∇X|, and of |∇A| = |(∇X)⁻¹| at the image points.
  double sup_grad_x() const;
  double sup_grad_a() const;
};

/// Velocity, its gradient ((∇u)_ij = ∂_j u_i) and ∇h at particle positions.
struct ParticleKinematics {
  std::vector<double> u1, u2;
  std::vector<double> g11, g12, g21, g22;
  std::vector<double> h1, h2;  // empty when the model has no forcing
};

/// stage in 0..3, stage time, positions -> kinematics
using KinematicsProvider =
    std::function<void(int, double, std::span<const double>, std::span<const double>, ParticleKinematics&)>;

/// RK4 over the augmented particle system (X, ∇X, G) using the provider at
/// the classical stage times. Throws InstabilityError on a non-finite Jacobian.
FlowMapEnsemble advect_flow_map(const FlowMapEnsemble& ens, const KinematicsProvider& provider, double dt);

/// Same, driven by the stage fields recorded by models::step so particles see
/// exactly the velocities the fluid integrator used.
FlowMapEnsemble advect_flow_map(const FlowMapEnsemble& ens, const StepRecord& record, double dt);

/// Grid fields ∇h for the Duhamel history: Boussinesq −e₂, IIE ∇(½|u|²), MHD −∇J.
std::optional<VectorField> forcing_gradient(ModelKind kind, const DerivedFields& d);

/// Kinematics from grid fields, interpolated at the given positions.
void kinematics_from_fields(ModelKind kind, const DerivedFields& d, std::span<const double> xs,
                            std::span<const double> ys, ParticleKinematics& out);

/// Back-to-label map A evaluated at points x: nearest particle, then Newton
/// steps on X(a) = x using interpolated displacement and Jacobian.
struct BackToLabel {
  std::vector<double> a1, a2;
  double max_residual = 0.0;  // sup |X(A(x)) − x| (periodic)
};
BackToLabel back_to_label(const FlowMapEnsemble& ens, std::span<const double> xs, std::span<const double> ys,
                          int newton_steps = 2);
BackToLabel back_to_label(const FlowMapEnsemble& ens, const Grid& g, int newton_steps = 2);

// ---- stretching and memory series ------------------------------------------

struct StretchingParams {
  double C_M = 1.0;
  double C_N = 1.0;
  double p = kDefaultP;
};

struct StretchingSample {
  double t = 0.0;
  double grad_u_inf = 0.0;
  double grad_u_w1p = 0.0;
  double M = 1.0, N = 1.0;
  double M_dot = 0.0, N_dot = 0.0;
  std::optional<double> M_measured;
  std::optional<double> detJ_err;
  std::optional<double> Q, Y, Z;
  double omega_inf = 0.0, omega_w1p = 0.0;
  std::optional<double> rho_w2p;
  double u_inf = 0.0, u_w2p = 0.0;
  std::optional<double> B_w2p;
  double K0 = 0.0, Kp = 0.0;
  double U = 0.0;           // ∫‖ω‖∞
  double W_integral = 0.0;  // ∫ (M+N)K₀ + M²K_p
  bool chord_arc_ok = true;
};

struct StretchingSeries {
  ModelKind kind = ModelKind::Euler;
  double delta = 0.0;
  StretchingParams params{};
  std::vector<StretchingSample> samples;

  /// Series whose memory terms (Q, Y, Z) must be nondecreasing.
  bool monotone_memory() const { return !is_mhd(kind); }
};

/// Appends a sample at state.t: M, N by trapezoidal accumulation, the norms,
/// and M_measured / detJ_err when an ensemble is given.
void compute_stretching(StretchingSeries& series, const FluidState& state, const DerivedFields& d,
                        const FlowMapEnsemble* ens);

/// Fills Q, Y, Z of the latest sample for the series' model.
void compute_memory(StretchingSeries& series, const FluidState& state, const DerivedFields& d);

inline void record_sample(StretchingSeries& series, const FluidState& state, const DerivedFields& d,
                          const FlowMapEnsemble* ens) {
  compute_stretching(series, state, d, ens);
  compute_memory(series, state, d);
}

/// First index where a required-monotone series decreases, if any.
std::optional<std::size_t> first_monotonicity_violation(const StretchingSeries& s);

// ---- Duhamel reconstruction and lemma checks --------------------------------

/// ω(t) = [ω₀ − ∇⊥ρ₀·G] ∘ A on the grid of state0.
ScalarField duhamel_vorticity(const FlowMapEnsemble& ens, const FluidState& state0, int newton_steps = 2);

struct InequalityMargin {
  double lhs = 0.0;
  double rhs = 0.0;  // already multiplied by the constant
  double margin() const { return rhs - lhs; }
};

struct TransportLemmaReport {
  InequalityMargin transport_p;    // ‖∇(ρ₀∘X)‖_p ≤ ‖∇X‖∞‖∇ρ₀‖_p
  InequalityMargin transport_inf;  // same with r = ∞
  InequalityMargin omega_w1p;      // ‖ω‖_{1,p} ≤ c(1 + M + δM∫(M+N)K₀ + M²K_p)
  std::optional<InequalityMargin> rho_w2p;  // ‖ρ‖_{2,p} ≤ c(1 + δ(M+N+M²))
};

/// Shapes of the two a priori bounds (before the implicit constant).
double omega_w1p_bound_shape(const StretchingSample& s, double delta);
double rho_w2p_bound_shape(const StretchingSample& s, double delta);

/// Smallest constants making both a priori bounds hold on a calibration series.
struct FittedConstants {
  double omega = 1.0;
  double rho = 1.0;
};
FittedConstants fit_lemma_constants(const StretchingSeries& calibration);

TransportLemmaReport check_transport_lemma(const FlowMapEnsemble& ens, const FluidState& state0,
                                           const StretchingSeries& series, const FittedConstants& c);

}  // namespace fluidspan
