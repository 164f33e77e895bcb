#include "fluidspan/grid.hpp"

#include <cmath>
#include <string>

#include "fluidspan/errors.hpp"

namespace fluidspan {

Grid::Grid(int nx, int ny, double dealias_fraction) : nx_(nx), ny_(ny), dealias_fraction_(dealias_fraction) {
  if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
    throw ParameterError("grid dimensions must be even and >= 8, got " + std::to_string(nx) + "x" +
                         std::to_string(ny));
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw ParameterError("dealias_fraction must lie in (0, 1]");
}

// Modes with |k| > fraction * n/2 are removed; the small epsilon keeps
// fraction * n/2 landing on an integer from rounding down.
int Grid::cutoff_x() const { return static_cast<int>(std::floor(dealias_fraction_ * nx_ / 2.0 + 1e-9)); }
int Grid::cutoff_y() const { return static_cast<int>(std::floor(dealias_fraction_ * ny_ / 2.0 + 1e-9)); }

}  // namespace fluidspan
