#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluidspan/lagrangian.hpp"
#include "fluidspan/logspace.hpp"

namespace fluidspan {

/// Constants of the hierarchical growth envelopes
///   M ≤ exp(e^{Λ₁t}), N ≤ exp(Λ₂exp(e^{Λ₁t})), Q ≤ Λ₄exp(Λ₃exp(e^{Λ₁t})).
struct GrowthConstants {
  double C = 0.0;
  double Lambda1 = 0.0, Lambda2 = 0.0, Lambda3 = 0.0, Lambda4 = 0.0;
};

/// Λ₁ = 1 + log(1+C), Λ₂ = C, Λ₃ = 2C, Λ₄ = 5C. Throws HypothesisError unless C > e.
GrowthConstants growth_constants(double C);

/// Λ₁* = C(1 + log(1+C)): the rate the saturated M equation actually needs.
double corrected_lambda1(double C);

struct ClosureSpec {
  std::vector<double> kappa;
  std::vector<double> zeta;  // each ≥ 1
  double C1 = 1.0, C2 = 1.0, C3 = 1.0;
};

enum class BoundKind { generic_closure, boussinesq, iie_lifespan, iie_continuation, mhd };
std::string to_string(BoundKind k);

/// T(δ) = c3⁻¹ log[c2⁻¹ log(c1⁻¹ log(C0/δ))], evaluated from ln δ so that
/// thresholds far below the double range stay representable.
class LifespanBound {
 public:
  LifespanBound(BoundKind kind, double C0, double c1, double c2, double c3, double ln_delta0,
                std::vector<double> zeta = {});

  BoundKind provenance() const { return kind_; }
  double C0() const { return C0_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double c3() const { return c3_; }
  double ln_delta0() const { return ln_delta0_; }
  double log10_delta0() const;
  const std::vector<double>& zeta() const { return zeta_; }

  /// Throws DomainError with level 1 when C0/δ ≤ 1 and level 2 when the
  /// middle logarithm's argument is not positive.
  double T(double delta) const;
  double T_ln(double ln_delta) const;

  /// log ℰ(t) = c1·exp(c2·e^{c3 t}).
  double log_energy(double t) const;
  /// ζ_j·C0/δ, the certified bound on F_j over [0, T_δ].
  double budget(std::size_t j, double delta) const;
  /// |log ℰ(T_δ) − log(C0/δ)| / log(C0/δ).
  double budget_certificate_error(double ln_delta) const;

 private:
  BoundKind kind_;
  double C0_, c1_, c2_, c3_, ln_delta0_;
  std::vector<double> zeta_;
};

/// Generic closure: C0 = 99/(100 max κ_jζ_j), δ₀ = C0·exp(−C1 e^{2C2}).
LifespanBound closure_lifespan(const ClosureSpec& spec);

/// Boussinesq: C0 = 99/(100Λ₄), nested log with Λ₃, 1, Λ₁.
LifespanBound boussinesq_bound(const GrowthConstants& L);

/// IIE lifespan with Λ from growth_constants(9e²C).
LifespanBound iie_bound(double C);

/// IIE continuation budget U(δ) = C⁻¹ log log[(12C)⁻¹ log(3/(100Cδ))] and
/// the threshold 3/(100C·e^{12Ce}) at which it degenerates to zero.
struct IIEContinuation {
  LifespanBound U_budget;
  double ln_delta0_bound;
  double log10_delta0_bound() const;
};
IIEContinuation iie_continuation_budget(double C);

struct MHDConstants {
  double C = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C4p = 0.0;
  double ln_delta0 = 0.0;
  double alpha0 = 0.0, beta0 = 0.0, gamma0 = 0.0;  // at δ₀
  double ln_f_delta0 = 0.0;                         // log f(δ₀)
  LifespanBound bound{BoundKind::mhd, 1.0, 1.0, 1.0, 1.0, 0.0};
  bool certificate() const { return ln_f_delta0 < 0.0; }
};
MHDConstants mhd_constants(double C);

/// α, β, γ of the MHD threshold argument, and f, f′, all from ln δ.
struct MHDThresholdTerms {
  double alpha, beta, gamma;
  double ln_f;
  double f_prime;
};
MHDThresholdTerms mhd_threshold_terms(const MHDConstants& k, double ln_delta);

// ---- saturated differential systems ----------------------------------------

enum class SaturatedKind { generic, boussinesq, iie_relaxed, mhd_simplified };
std::string to_string(SaturatedKind k);

struct SaturatedOptions {
  double delta = 0.0;  // only used by the MHD Q equation
  int samples = 501;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::optional<double> lambda1;  // override Λ₁ in the envelopes
};

struct EnvelopeCheck {
  std::string name;
  double min_margin = logspace::kInf;  // rhs − lhs at the compared log level
  double t_min_margin = 0.0;
  std::optional<double> first_violation;
  double lhs_at_violation = 0.0, rhs_at_violation = 0.0;
  bool holds() const { return !first_violation.has_value(); }
};

/// Trajectory columns are logarithms; Q is stored as log(1+Q). For the MHD
/// system log_N holds log Y and log_Z is populated.
struct SaturatedReport {
  SaturatedKind kind;
  double C = 0.0;
  GrowthConstants lambda;
  std::vector<double> t, log_M, log_N, log1p_Q, log_Z;
  std::vector<EnvelopeCheck> envelopes;
  bool all_hold() const;
};

/// Integrates the system with inequalities replaced by equalities (dopri5,
/// dense output) and checks the closed-form envelopes on the sample grid.
/// Throws ConvergenceError when the integration leaves the finite range.
SaturatedReport integrate_saturated_system(SaturatedKind kind, double C, double t_end, const SaturatedOptions& opt = {});

// ---- runtime monitor --------------------------------------------------------

struct HypothesisComponent {
  std::string name;  // e.g. "delta*Y"
  double threshold = 1.0;
  std::vector<double> values;
  std::optional<double> first_violation;
};

struct MonitorReport {
  ModelKind model = ModelKind::Euler;
  double delta = 0.0;
  double C_fit = 0.0;
  bool unconditional = false;
  std::vector<double> t;
  std::vector<HypothesisComponent> components;
  std::optional<double> T_emp;  // empty when no component is violated

  /// "unconditional", "none", or the crossing time.
  std::string T_emp_string() const;
};

MonitorReport bootstrap_monitor(const StretchingSeries& series, ModelKind model, double delta, double C_fit);

/// Smallest C (but > e) for which Ṅ ≤ CN(1+M) and Ṁ ≤ CM(1+log(1+Ṅ/N))
/// hold on every sample of a δ = 0 calibration run.
double calibrate_c_fit(const StretchingSeries& calibration);

/// Theoretical lifespan bound for a model given the calibrated constant.
/// Throws ParameterError for models without one.
LifespanBound lifespan_for_model(ModelKind model, double C_fit);

}  // namespace fluidspan
