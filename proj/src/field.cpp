#include "fluidspan/field.hpp"

#include <cmath>

#include "fluidspan/errors.hpp"
#include "fluidspan/fft.hpp"
#include "fluidspan/kernels.hpp"

namespace fluidspan {

ScalarField::ScalarField(const Grid& g)
    : grid_(g), values_(g.size(), 0.0), spec_(g.spectral_size(), cplx{}) {}

ScalarField::ScalarField(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.size()) throw ShapeError("value array does not match grid size");
  require_finite();
  spec_.resize(g.spectral_size());
  fft::forward(g.nx(), g.ny(), values_, spec_);
}

ScalarField ScalarField::from_spectrum(const Grid& g, std::vector<cplx> spectrum) {
  if (spectrum.size() != g.spectral_size()) throw ShapeError("spectrum does not match grid size");
  std::vector<double> v(g.size());
  fft::inverse(g.nx(), g.ny(), spectrum, v);
  ScalarField f(g, std::move(v), std::move(spectrum));
  f.require_finite();
  return f;
}

ScalarField ScalarField::from_function(const Grid& g, const std::function<double(double, double)>& fn) {
  std::vector<double> v(g.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v[static_cast<std::size_t>(j) * g.nx() + i] = fn(g.x(i), g.y(j));
  return ScalarField(g, std::move(v));
}

ScalarField ScalarField::constant(const Grid& g, double c) {
  std::vector<cplx> s(g.spectral_size(), cplx{});
  s[0] = c;
  return ScalarField(g, std::vector<double>(g.size(), c), std::move(s));
}

ScalarField ScalarField::combine(double a, const ScalarField& o, double b) const {
  require_same_grid(o);
  std::vector<double> v(values_.size());
  std::vector<cplx> s(spec_.size());
  kernels::lincomb(v, a, values_, b, o.values_);
  kernels::lincomb(s, a, spec_, b, o.spec_);
  return ScalarField(grid_, std::move(v), std::move(s));
}

ScalarField ScalarField::scaled(double a) const { return combine(a, *this, 0.0); }

ScalarField ScalarField::times(const ScalarField& o) const {
  require_same_grid(o);
  std::vector<double> v(values_.size());
  kernels::multiply(v, values_, o.values_);
  return ScalarField(grid_, std::move(v));
}

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(values_[i]);
  return ScalarField(grid_, std::move(v));
}

double ScalarField::max_abs() const { return kernels::max_abs(values_); }

double ScalarField::integral() const { return kernels::sum(values_) * grid_.cell_area(); }

void ScalarField::require_same_grid(const ScalarField& o) const {
  if (!(grid_ == o.grid_)) throw ShapeError("fields live on different grids");
}

void ScalarField::require_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidFieldError("field contains non-finite values");
}

double VectorField::max_norm() const { return kernels::max_hypot(x.values(), y.values()); }

}  // namespace fluidspan
