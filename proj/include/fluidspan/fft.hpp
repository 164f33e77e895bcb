#pragma once

#include <complex>
#include <span>

namespace fluidspan::fft {

/// Real-to-complex transform of an ny-by-nx row-major array. The output holds
/// ny rows of nx/2+1 coefficients normalized by 1/(nx*ny), so a unit-amplitude
/// cos(k x) shows up as 1/2 at mode k.
void forward(int nx, int ny, std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of forward(). `in` is left untouched.
void inverse(int nx, int ny, std::span<const std::complex<double>> in, std::span<double> out);

/// Fault-injection hook for the verification suite: when enabled, every
/// forward transform scales its odd-kx modes by (1 + 1e-3). Also enabled by
/// the environment variable FLUIDSPAN_FAULT_FFT=1.
void set_fault_injection(bool enabled);
bool fault_injection();

}  // namespace fluidspan::fft
