#pragma once

#include <string>

#include "fluidspan/errors.hpp"
#include "fluidspan/spectral.hpp"

namespace fluidspan {

enum class EllipticMethod { automatic, fixed_point, preconditioned_cg };

std::string to_string(EllipticMethod m);

struct EllipticOptions {
  double tol = 1e-10;
  int max_iter = 500;
  EllipticMethod method = EllipticMethod::automatic;
  /// automatic mode switches to CG once the measured contraction reaches this.
  double contraction_limit = 0.9;
};

struct EllipticSolveReport {
  int iterations = 0;
  double residual = 0.0;  // relative, mean-zero-projected L²
  EllipticMethod method = EllipticMethod::fixed_point;
  double contraction_estimate = 0.0;
};

class EllipticConvergenceError : public ConvergenceError {
 public:
  EllipticConvergenceError(const std::string& what, EllipticSolveReport r) : ConvergenceError(what), report_(r) {}
  const EllipticSolveReport& report() const { return report_; }

 private:
  EllipticSolveReport report_;
};

struct EllipticSolution {
  ScalarField q;
  EllipticSolveReport report;
};

/// ∇·(μ∇q) applied with unaliased spectral derivatives and a pointwise product.
ScalarField variable_laplacian(const ScalarField& mu, const ScalarField& q);

/// Mean-zero q with ∇·(μ∇q) = f. μ must be positive; f is projected to mean zero.
EllipticSolution solve_variable_poisson(const ScalarField& mu, const ScalarField& f,
                                        const EllipticOptions& opt = {});

/// q for the inhomogeneous Biot-Savart law: ∇·(μ∇q) = −∇·((μ−1)Kω), μ = 1/ρ.
EllipticSolution solve_q(const ScalarField& rho, const ScalarField& omega, const EllipticOptions& opt = {});

/// u = μ(Kω + ∇q): divergence free, ∇×(ρu) = ω and ∫ρu = 0.
VectorField recover_velocity_iie(const ScalarField& rho, const ScalarField& omega, const EllipticOptions& opt = {},
                                 EllipticSolveReport* report = nullptr);

/// 1/ρ, rejecting vacuum.
ScalarField reciprocal_density(const ScalarField& rho);

}  // namespace fluidspan
