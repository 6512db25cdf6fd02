#include "fft_backend.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>

namespace sbpp::detail {
namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

struct PlanPair {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::size_t real_size(int n) { return static_cast<std::size_t>(n) * n * n; }
std::size_t complex_size(int n) { return static_cast<std::size_t>(n) * n * (n / 2 + 1); }

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

const PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  RealBuffer r(fftw_alloc_real(real_size(n)));
  ComplexBuffer c(fftw_alloc_complex(complex_size(n)));
  PlanPair plans;
  plans.r2c = fftw_plan_dft_r2c_3d(n, n, n, r.get(), c.get(), FFTW_ESTIMATE);
  plans.c2r = fftw_plan_dft_c2r_3d(n, n, n, c.get(), r.get(), FFTW_ESTIMATE);
  return cache.emplace(n, plans).first->second;
}

}  // namespace

void fft_r2c(int n, const double* in, std::complex<double>* out) {
  const PlanPair& plans = plans_for(n);
  RealBuffer r(fftw_alloc_real(real_size(n)));
  ComplexBuffer c(fftw_alloc_complex(complex_size(n)));
  std::copy(in, in + real_size(n), r.get());
  fftw_execute_dft_r2c(plans.r2c, r.get(), c.get());
  const auto* src = reinterpret_cast<const std::complex<double>*>(c.get());
  std::copy(src, src + complex_size(n), out);
}

void fft_c2r(int n, const std::complex<double>* in, double* out) {
  const PlanPair& plans = plans_for(n);
  RealBuffer r(fftw_alloc_real(real_size(n)));
  ComplexBuffer c(fftw_alloc_complex(complex_size(n)));
  // c2r overwrites its input, so it always runs on a scratch copy.
  std::copy(in, in + complex_size(n), reinterpret_cast<std::complex<double>*>(c.get()));
  fftw_execute_dft_c2r(plans.c2r, c.get(), r.get());
  std::copy(r.get(), r.get() + real_size(n), out);
}

}  // namespace sbpp::detail
