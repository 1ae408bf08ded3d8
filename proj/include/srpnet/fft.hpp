/*
 * Copyright 2026 The srpnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "srpnet/common.hpp"

namespace srpnet {

using Complex = std::complex<double>;

// Mixed-radix Cooley-Tukey FFT for arbitrary lengths. Lengths with large
// prime factors degrade gracefully to O(n * p) butterflies. A plan is
// immutable after construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("FftPlan: length must be > 0");
    std::size_t rest = n;
    for (std::size_t p : {4u, 2u, 3u, 5u}) {
      while (rest % p == 0) {
        factors_.push_back(p);
        rest /= p;
      }
    }
    for (std::size_t p = 7; p * p <= rest; p += 2) {
      while (rest % p == 0) {
        factors_.push_back(p);
        rest /= p;
      }
    }
    if (rest > 1) factors_.push_back(rest);

    twiddles_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(a), std::sin(a));
    }
  }

  std::size_t size() const { return n_; }

  // Unnormalized forward transform: X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
  void forward(std::span<const Complex> in, std::span<Complex> out) const {
    check(in, out);
    transform(in.data(), out.data(), n_, 1, 0, 1, false);
  }

  // Inverse transform including the 1/N factor.
  void inverse(std::span<const Complex> in, std::span<Complex> out) const {
    check(in, out);
    transform(in.data(), out.data(), n_, 1, 0, 1, true);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
  }

  std::vector<Complex> forward(std::span<const Complex> in) const {
    std::vector<Complex> out(n_);
    forward(in, out);
    return out;
  }

  std::vector<Complex> inverse(std::span<const Complex> in) const {
    std::vector<Complex> out(n_);
    inverse(in, out);
    return out;
  }

 private:
  void check(std::span<const Complex> in, std::span<Complex> out) const {
    if (in.size() != n_ || out.size() != n_)
      throw std::invalid_argument("FftPlan: buffer length does not match plan");
    if (in.data() == out.data())
      throw std::invalid_argument("FftPlan: in-place transforms are not supported");
  }

  Complex twiddle(std::size_t index, bool inverse) const {
    const Complex w = twiddles_[index % n_];
    return inverse ? std::conj(w) : w;
  }

  // Decimation in time. `stride` walks the input, `tw_stride` maps the
  // current sub-length onto the global twiddle table.
  void transform(const Complex* in, Complex* out, std::size_t n,
                 std::size_t stride, std::size_t level, std::size_t tw_stride,
                 bool inverse) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t q = 0; q < p; ++q)
      transform(in + q * stride, out + q * m, m, stride * p, level + 1,
                tw_stride * p, inverse);

    if (p == 2) {
      for (std::size_t k = 0; k < m; ++k) {
        const Complex t = out[k + m] * twiddle(k * tw_stride, inverse);
        out[k + m] = out[k] - t;
        out[k] += t;
      }
      return;
    }
    if (p == 4) {
      const Complex j = inverse ? Complex(0, 1) : Complex(0, -1);
      for (std::size_t k = 0; k < m; ++k) {
        const Complex a0 = out[k];
        const Complex a1 = out[k + m] * twiddle(k * tw_stride, inverse);
        const Complex a2 = out[k + 2 * m] * twiddle(2 * k * tw_stride, inverse);
        const Complex a3 = out[k + 3 * m] * twiddle(3 * k * tw_stride, inverse);
        const Complex s02 = a0 + a2, d02 = a0 - a2;
        const Complex s13 = a1 + a3, d13 = (a1 - a3) * j;
        out[k] = s02 + s13;
        out[k + m] = d02 + d13;
        out[k + 2 * m] = s02 - s13;
        out[k + 3 * m] = d02 - d13;
      }
      return;
    }

    // Generic radix-p butterfly.
    std::vector<Complex> scratch(p);
    const std::size_t root_stride = m * tw_stride;  // e^{-j 2 pi / p}
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < p; ++q)
        scratch[q] = out[k + q * m] * twiddle(q * k * tw_stride, inverse);
      for (std::size_t r = 0; r < p; ++r) {
        Complex acc = scratch[0];
        for (std::size_t q = 1; q < p; ++q)
          acc += scratch[q] * twiddle(((q * r) % p) * root_stride, inverse);
        out[k + r * m] = acc;
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<Complex> twiddles_;
};

}  // namespace srpnet
