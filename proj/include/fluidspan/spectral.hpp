#pragma once

#include <array>
#include <limits>

#include "fluidspan/field.hpp"

namespace fluidspan {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultP = 4.0;

/// ∂x^ax ∂y^ay f with ax + ay <= 4. Odd derivatives of Nyquist modes vanish.
ScalarField derivative(const ScalarField& f, int ax, int ay);
ScalarField laplacian(const ScalarField& f);

/// Mean-zero solution of Δg = f. Throws SolvabilityError when
/// |mean f| > 1e-10 ‖f‖∞.
ScalarField invert_laplacian(const ScalarField& f);

VectorField gradient(const ScalarField& f);
/// ∇⊥f = (−∂y f, ∂x f)
VectorField perp_gradient(const ScalarField& f);

/// u = ∇⊥Δ⁻¹ω
VectorField biot_savart(const ScalarField& omega);
ScalarField curl(const VectorField& u);
ScalarField divergence(const VectorField& u);

/// Removes modes beyond the grid's dealias cutoff. Idempotent.
ScalarField dealias(const ScalarField& f);
/// Dealiased pointwise product.
ScalarField product(const ScalarField& f, const ScalarField& g);

/// {f, g} = ∇⊥f·∇g = ∂x f ∂y g − ∂y f ∂x g, dealiased.
ScalarField poisson_bracket(const ScalarField& f, const ScalarField& g);

/// Riemann-sum L^p norm; p = kInfinity gives the grid sup.
double lp_norm(const ScalarField& f, double p);

/// Σ_{|α|<=k} ‖∂^α f‖_p with k in 0..3. p must exceed 2 unless allow_p2 is
/// set, which admits p = 2 for quadrature checks.
double sobolev_norm(const ScalarField& f, int k, double p = kDefaultP, bool allow_p2 = false);

/// Value, gradient and Hessian of the trigonometric interpolant at (x, y).
struct PointJet {
  double value = 0.0;
  std::array<double, 2> grad{};
  std::array<double, 3> hess{};  // fxx, fxy, fyy
};
PointJet evaluate_jet(const ScalarField& f, double x, double y);

/// sup |f| of the trigonometric interpolant: the largest grid samples are
/// refined by Newton iteration on the spectral series. Never below the grid sup.
double refined_sup(const ScalarField& f, int candidates = 8);

/// Grid sup of the pointwise 2x2 operator norm of ∇u.
double gradient_opnorm_sup(const VectorField& u);

/// ‖∇u‖∞ / [(1 + log(2 + ‖ω‖_{1,p})) ‖ω‖∞] with u = Kω. Zero for ω = 0.
double kato_ratio(const ScalarField& omega, double p = kDefaultP);

/// Fraction of Σ|ω̂|² carried by the outermost shell 7/8 < max(|kx|/kcx, |ky|/kcy) <= 1.
double tail_enstrophy_fraction(const ScalarField& omega);

}  // namespace fluidspan
