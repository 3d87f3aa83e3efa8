// Copyright 2026 The mixsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixsim/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

namespace mixsim {

namespace {

std::span<const double> trim_trailing_zeros(std::span<const double> h) {
  std::size_t n = h.size();
  while (n > 0 && h[n - 1] == 0.0) --n;
  return h.first(n);
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays with the same alignment is.
PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = fftw_buffer<double>(n);
  auto spectrum = fftw_buffer<fftw_complex>(n / 2 + 1);
  PlanPair pair;
  pair.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spectrum.get(), FFTW_ESTIMATE);
  pair.inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum.get(), real.get(), FFTW_ESTIMATE);
  cache.emplace(n, pair);
  return pair;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h, std::size_t output_length) {
  std::vector<double> y(output_length, 0.0);
  const std::size_t full = std::min(output_length, full_convolution_length(x.size(), h.size()));
  for (std::size_t n = 0; n < full; ++n) {
    const std::size_t k_lo = n + 1 > x.size() ? n + 1 - x.size() : 0;
    const std::size_t k_hi = std::min(n, h.size() - 1);
    double acc = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) acc += h[k] * x[n - k];
    y[n] = acc;
  }
  return y;
}

std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h, std::size_t output_length) {
  std::vector<double> y(output_length, 0.0);
  const std::size_t full = std::min(output_length, full_convolution_length(x.size(), h.size()));
  if (full == 0) return y;

  const std::size_t n = std::max<std::size_t>(next_pow2(2 * h.size()), 256);
  const std::size_t block = n - h.size() + 1;
  const std::size_t bins = n / 2 + 1;
  const PlanPair plan = plans_for(n);

  auto real = fftw_buffer<double>(n);
  auto spectrum = fftw_buffer<fftw_complex>(bins);
  auto kernel = fftw_buffer<fftw_complex>(bins);

  std::fill_n(real.get(), n, 0.0);
  std::copy(h.begin(), h.end(), real.get());
  fftw_execute_dft_r2c(plan.forward, real.get(), kernel.get());

  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t start = 0; start < x.size() && start < full; start += block) {
    const std::size_t len = std::min(block, x.size() - start);
    std::fill_n(real.get(), n, 0.0);
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), len, real.get());
    fftw_execute_dft_r2c(plan.forward, real.get(), spectrum.get());
    for (std::size_t b = 0; b < bins; ++b) {
      const double re = spectrum[b][0] * kernel[b][0] - spectrum[b][1] * kernel[b][1];
      const double im = spectrum[b][0] * kernel[b][1] + spectrum[b][1] * kernel[b][0];
      spectrum[b][0] = re;
      spectrum[b][1] = im;
    }
    fftw_execute_dft_c2r(plan.inverse, spectrum.get(), real.get());
    const std::size_t stop = std::min(full, start + len + h.size() - 1);
    for (std::size_t i = start; i < stop; ++i) y[i] += real[i - start] * scale;
  }
  return y;
}

std::vector<double> convolve(std::span<const double> x, std::span<const double> h, std::size_t output_length) {
  const auto kernel = trim_trailing_zeros(h);
  if (kernel.size() <= kDirectKernelThreshold) return convolve_direct(x, kernel, output_length);
  return convolve_fft(x, kernel, output_length);
}

}  // namespace mixsim
