#pragma once

#include <cstddef>
#include <numbers>

namespace fluidspan {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform grid on the torus [0, 2π)². Samples are stored row-major with x
/// varying fastest: index = j * nx + i at (x_i, y_j) = (2π i/nx, 2π j/ny).
class Grid {
 public:
  Grid(int nx, int ny, double dealias_fraction = 2.0 / 3.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dealias_fraction() const { return dealias_fraction_; }

  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  int spectral_nx() const { return nx_ / 2 + 1; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(spectral_nx()) * static_cast<std::size_t>(ny_); }

  double dx() const { return kTwoPi / nx_; }
  double dy() const { return kTwoPi / ny_; }
  double cell_area() const { return dx() * dy(); }
  double area() const { return kTwoPi * kTwoPi; }

  double x(int i) const { return dx() * i; }
  double y(int j) const { return dy() * j; }

  /// Signed wavenumber of spectral row j.
  int ky(int j) const { return j <= ny_ / 2 ? j : j - ny_; }

  /// Largest retained |kx|, |ky| after dealiasing.
  int cutoff_x() const;
  int cutoff_y() const;

  bool operator==(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && dealias_fraction_ == o.dealias_fraction_;
  }

 private:
  int nx_;
  int ny_;
  double dealias_fraction_;
};

}  // namespace fluidspan
