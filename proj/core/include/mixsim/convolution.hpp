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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mixsim {

// Kernels up to this many taps (after dropping trailing zeros) are applied
// in direct form; longer ones use FFT overlap-add.
inline constexpr std::size_t kDirectKernelThreshold = 64;

// All variants return the first output_length samples of the full linear
// convolution (zero beyond x.size() + h.size() - 1).
std::vector<double> convolve_direct(std::span<const double> x, std::span<const double> h, std::size_t output_length);
std::vector<double> convolve_fft(std::span<const double> x, std::span<const double> h, std::size_t output_length);
std::vector<double> convolve(std::span<const double> x, std::span<const double> h, std::size_t output_length);

inline std::size_t full_convolution_length(std::size_t x, std::size_t h) { return x == 0 || h == 0 ? 0 : x + h - 1; }

}  // namespace mixsim
