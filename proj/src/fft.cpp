#include "fluidspan/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace fluidspan::fft {

namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex g_plan_mutex;
std::map<std::pair<int, int>, Plans> g_plans;

std::atomic<int> g_fault{-1};

// FFTW planning is not thread safe; execution with the new-array interface is.
// FFTW_ESTIMATE keeps the chosen algorithm, and therefore the bits, fixed.
const Plans& plans_for(int nx, int ny) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_plans.find({nx, ny});
  if (it != g_plans.end()) return it->second;
  const std::size_t nk = static_cast<std::size_t>(nx / 2 + 1);
  std::vector<double> re(static_cast<std::size_t>(nx) * ny);
  std::vector<std::complex<double>> sp(nk * ny);
  Plans p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.r2c = fftw_plan_dft_r2c_2d(ny, nx, re.data(), reinterpret_cast<fftw_complex*>(sp.data()), flags);
  p.c2r = fftw_plan_dft_c2r_2d(ny, nx, reinterpret_cast<fftw_complex*>(sp.data()), re.data(), flags);
  return g_plans.emplace(std::make_pair(nx, ny), p).first->second;
}

}  // namespace

void set_fault_injection(bool enabled) { g_fault.store(enabled ? 1 : 0); }

bool fault_injection() {
  int f = g_fault.load();
  if (f < 0) {
    const char* env = std::getenv("FLUIDSPAN_FAULT_FFT");
    f = (env != nullptr && std::strcmp(env, "1") == 0) ? 1 : 0;
    g_fault.store(f);
  }
  return f == 1;
}

void forward(int nx, int ny, std::span<const double> in, std::span<std::complex<double>> out) {
  const Plans& p = plans_for(nx, ny);
  // r2c leaves its input intact, but the interface takes a non-const pointer.
  fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  double scale = 1.0 / (static_cast<double>(nx) * ny);
  for (auto& c : out) c *= scale;
  if (fault_injection()) {
    // a mode-dependent gain breaks the antisymmetry that conserves the invariants;
    // a uniform one would only rescale time
    const int nk = nx / 2 + 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nk; i += 2) out[static_cast<std::size_t>(j) * nk + i] *= 1.0 + 1e-3;
  }
}

void inverse(int nx, int ny, std::span<const std::complex<double>> in, std::span<double> out) {
  const Plans& p = plans_for(nx, ny);
  // c2r destroys its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace fluidspan::fft
