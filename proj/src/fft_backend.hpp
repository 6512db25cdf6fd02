#pragma once

#include <complex>

namespace sbpp::detail {

// Unnormalized 3-D real transforms on an n^3 grid backed by FFTW. Plans are
// created once per n under a lock (FFTW_ESTIMATE, so results are
// reproducible run to run) and executed on per-call buffers.
void fft_r2c(int n, const double* in, std::complex<double>* out);
// `in` is not modified.
void fft_c2r(int n, const std::complex<double>* in, double* out);

}  // namespace sbpp::detail
