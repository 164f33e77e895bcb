#pragma once

#include <functional>
#include <vector>

// Kept free of C++20 so the implementation can be built as C++17: Boost's
// ublas (needed by the Rosenbrock stepper) still calls allocator::construct.
namespace fluidspan::detail {

using StiffRhs = std::function<void(const std::vector<double>& y, std::vector<double>& dy)>;
/// J is row-major n x n.
using StiffJacobian = std::function<void(const std::vector<double>& y, std::vector<double>& J)>;
/// Returning false stops the integration after this time.
using StiffObserver = std::function<bool(const std::vector<double>& y, double t)>;

/// Autonomous system, Rosenbrock order 4 with dense output, observed at
/// `times`. Returns how many times were observed.
std::size_t integrate_stiff(std::vector<double> y, const StiffRhs& rhs, const StiffJacobian& jac,
                     const std::vector<double>& times, double dt0, double abs_tol, double rel_tol,
                     const StiffObserver& observe);

}  // namespace fluidspan::detail
