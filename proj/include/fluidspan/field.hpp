#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "fluidspan/grid.hpp"

namespace fluidspan {

using cplx = std::complex<double>;

/// Periodic scalar on a Grid. Both the physical samples and the r2c spectrum
/// are held and kept consistent; linear combinations act on both copies so
/// they cost no transforms. Values are immutable after construction.
class ScalarField {
 public:
  explicit ScalarField(const Grid& g);  // zero field
  ScalarField(const Grid& g, std::vector<double> values);
  static ScalarField from_spectrum(const Grid& g, std::vector<cplx> spectrum);
  static ScalarField from_function(const Grid& g, const std::function<double(double, double)>& f);
  static ScalarField constant(const Grid& g, double c);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<const cplx> spectrum() const { return spec_; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j) * grid_.nx() + i]; }
  double mean() const { return spec_[0].real(); }

  /// a*this + b*other
  ScalarField combine(double a, const ScalarField& other, double b) const;
  ScalarField scaled(double a) const;
  ScalarField operator+(const ScalarField& o) const { return combine(1.0, o, 1.0); }
  ScalarField operator-(const ScalarField& o) const { return combine(1.0, o, -1.0); }
  ScalarField operator-() const { return scaled(-1.0); }
  friend ScalarField operator*(double a, const ScalarField& f) { return f.scaled(a); }

  /// Pointwise product, not dealiased.
  ScalarField times(const ScalarField& o) const;
  ScalarField map(const std::function<double(double)>& f) const;

  double max_abs() const;
  double integral() const;

  void require_same_grid(const ScalarField& o) const;
  void require_finite() const;

 private:
  ScalarField(const Grid& g, std::vector<double> values, std::vector<cplx> spec)
      : grid_(g), values_(std::move(values)), spec_(std::move(spec)) {}

  Grid grid_;
  std::vector<double> values_;
  std::vector<cplx> spec_;
};

struct VectorField {
  ScalarField x;
  ScalarField y;

  VectorField combine(double a, const VectorField& o, double b) const {
    return {x.combine(a, o.x, b), y.combine(a, o.y, b)};
  }
  double max_norm() const;
};

}  // namespace fluidspan
