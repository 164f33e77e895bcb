#pragma once

#include <cmath>
#include <limits>

// Helpers for quantities that only exist as logarithms (δ₀ for MHD is
// exp(−10¹³)-ish, N in the saturated systems overflows any float).
namespace fluidspan::logspace {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn10 = 2.302585092994045684;

/// log(e^a + e^b) without overflow.
inline double add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

template <class... T>
double add(double a, double b, T... rest) {
  return add(add(a, b), rest...);
}

/// log(e^a − e^b), a ≥ b.
inline double sub(double a, double b) {
  if (b == kNegInf) return a;
  return a + std::log1p(-std::exp(b - a));
}

/// log(x) given l = log(1 + x), accurate for both tiny and huge x.
inline double log_from_log1p(double l) {
  if (l <= 0.0) return kNegInf;
  return l + std::log(-std::expm1(-l));
}

inline double to_log10(double ln) { return ln / kLn10; }

}  // namespace fluidspan::logspace
