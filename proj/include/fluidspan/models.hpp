#pragma once

#include <array>
#include <optional>
#include <string>

#include "fluidspan/elliptic.hpp"
#include "fluidspan/spectral.hpp"

namespace fluidspan {

enum class ModelKind { Euler, Boussinesq, MHD_VorticityCurrent, MHD_Elsasser, IIE };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);  // accepts the enum spelling or euler|boussinesq|mhd|mhd-elsasser|iie
bool is_mhd(ModelKind k);

/// Evolved state. Fields a model does not use hold zeros (rho = 1 for Euler).
/// For MHD rho is the magnetic potential: B = ∇⊥ρ, J = Δρ.
struct FluidState {
  ModelKind kind;
  double t = 0.0;
  ScalarField omega;
  ScalarField rho;
  ScalarField xi;
  ScalarField eta;
  /// Boussinesq only: −∫ρ x₂ carried as d/dt = −∫ρ u₂, since x₂ is not periodic.
  double potential = 0.0;
  /// MHD_Elsasser only: mean of ρ, restored when ρ is rebuilt from J.
  double rho_mean = 0.0;

  const Grid& grid() const { return omega.grid(); }
};

struct ModelOptions {
  double cfl = 0.5;
  EllipticOptions elliptic{};
};

struct Tendency {
  ScalarField a;  // ω̇ or ξ̇
  ScalarField b;  // ρ̇ or η̇ (zero for Euler)
  double potential = 0.0;
};

/// Velocity, vorticity and the derived MHD fields of a state.
struct DerivedFields {
  VectorField u;
  ScalarField omega;
  std::optional<ScalarField> rho;  // ρ including its mean
  std::optional<ScalarField> J;
  std::optional<VectorField> B;
  EllipticSolveReport elliptic{};
};

DerivedFields derive(const FluidState& s, const ModelOptions& opt = {});

Tendency rhs(const FluidState& s, const ModelOptions& opt = {});
Tendency rhs(const FluidState& s, const DerivedFields& d);

/// 𝒬(u, ρ) = −2 Σ ∂ᵢuⱼ ∂ᵢ∂ⱼρ, dealiased. J̇ = −u·∇J + B·∇ω + 𝒬.
ScalarField mhd_q_operator(const VectorField& u, const ScalarField& rho);

/// Explicit (ω̇, J̇) of the vorticity-current form, for cross-checks.
std::pair<ScalarField, ScalarField> mhd_vorticity_current_rhs(const ScalarField& omega, const ScalarField& rho);

std::pair<ScalarField, ScalarField> elsasser_transform(const ScalarField& omega, const ScalarField& J);
std::pair<ScalarField, ScalarField> elsasser_inverse(const ScalarField& xi, const ScalarField& eta);

/// Same physical state in the other MHD carrier.
FluidState to_elsasser(const FluidState& s);
FluidState to_vorticity_current(const FluidState& s);

double cfl_limit(const FluidState& s, const ModelOptions& opt = {});
double cfl_limit(const FluidState& s, const DerivedFields& d, double cfl);

/// States and velocities at the four RK4 stages (times t, t+dt/2, t+dt/2, t+dt).
struct StepRecord {
  std::array<std::optional<FluidState>, 4> stage;
  std::array<std::optional<DerivedFields>, 4> derived;
};

/// Classical RK4. Throws PreconditionError if dt exceeds the CFL limit and
/// InstabilityError naming the stage when a stage turns non-finite.
FluidState step(const FluidState& s, double dt, const ModelOptions& opt = {}, StepRecord* record = nullptr);

struct ConservedQuantities {
  double E_kinetic = 0.0;
  double E_model = 0.0;
  std::optional<double> mass;
  std::optional<double> momentum_x, momentum_y;
  std::optional<double> cross_helicity;
  double omega_p = 0.0;
  double omega_inf = 0.0;          // grid sup
  double omega_inf_refined = 0.0;  // sup of the trigonometric interpolant
  std::optional<double> rho_p;
};

ConservedQuantities conserved_quantities(const FluidState& s, const ModelOptions& opt = {}, double p = kDefaultP,
                                         bool refine_sup = true);

// ---- initial data ----------------------------------------------------------

enum class VorticityProfile { standard, eigen, zero, shear };
/// Which norm of the density perturbation equals δ.
enum class DeltaNorm { rho_w2p, mu_w2p, rho_w3p };

VorticityProfile parse_profile(const std::string& s);
DeltaNorm parse_delta_norm(const std::string& s);
std::string to_string(VorticityProfile p);
std::string to_string(DeltaNorm n);
DeltaNorm default_delta_norm(ModelKind k);

struct InitialData {
  VorticityProfile profile = VorticityProfile::standard;
  double delta = 0.0;
  std::optional<DeltaNorm> norm;  // model default when unset
  double p = kDefaultP;
};

/// ω₀ from the profile; ρ₀ = 1 + δθ̂ (or 1/ρ₀ = 1 + δθ̂ for the μ norm) with
/// θ̂ = sin x cos y scaled to unit norm.
FluidState make_initial_state(ModelKind kind, const Grid& g, const InitialData& init);

}  // namespace fluidspan
