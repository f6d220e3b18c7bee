#pragma once

// Straightforward reference implementations used to check the optimised code.
// Deliberately loop-based and free of shared helpers with the library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "autosen/random.hpp"
#include "autosen/tensor.hpp"

namespace oracle {

using autosen::Tensor;

inline Tensor random_tensor(Tensor::Shape shape, std::uint64_t seed, double scale = 1.0) {
  autosen::Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

// x: (Cin, H, W), w: (Cout, Cin, kh, kw) -> (Cout, H', W'), valid padding.
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t sh,
                     std::size_t sw) {
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = (h - kh) / sh + 1, ow = (wd - kw) / sw + 1;
  Tensor y({cout, oh, ow});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = b[o];
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t p = 0; p < kh; ++p)
            for (std::size_t q = 0; q < kw; ++q)
              acc += w.at(o, c, p, q) * x.at(c, i * sh + p, j * sw + q);
        y.at(o, i, j) = acc;
      }
  return y;
}

// x: (Cin, H, W), w: (Cin, Cout, kh, kw) -> (Cout, (H-1)sh+kh, (W-1)sw+kw), scatter form.
inline Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t sh,
                               std::size_t sw) {
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t cout = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  Tensor y({cout, (h - 1) * sh + kh, (wd - 1) * sw + kw});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t i = 0; i < y.dim(1); ++i)
      for (std::size_t j = 0; j < y.dim(2); ++j) y.at(o, i, j) = b[o];
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < wd; ++j)
        for (std::size_t o = 0; o < cout; ++o)
          for (std::size_t p = 0; p < kh; ++p)
            for (std::size_t q = 0; q < kw; ++q)
              y.at(o, i * sh + p, j * sw + q) += w.at(c, o, p, q) * x.at(c, i, j);
  return y;
}

inline std::vector<double> matvec(const Tensor& w, const std::vector<double>& x,
                                  const Tensor& b) {
  std::vector<double> y(w.dim(0));
  for (std::size_t r = 0; r < w.dim(0); ++r) {
    double acc = b[r];
    for (std::size_t c = 0; c < w.dim(1); ++c) acc += w.at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

// Two passes: differences first, then the mean of their squares.
inline double mse(const Tensor& a, const Tensor& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  long double s = 0.0L;
  for (double v : d) s += static_cast<long double>(v) * v;
  return static_cast<double>(s / d.size());
}

inline double inner(const Tensor& a, const Tensor& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

// Endpoint line through (m_first, p_first) and (m_last, p_last), shifted to the mean.
inline std::vector<double> endpoint_residual(const std::vector<double>& phi,
                                             const std::vector<int>& m) {
  const std::size_t n = phi.size();
  const double k = (phi[n - 1] - phi[0]) / (m[n - 1] - m[0]);
  double mp = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += phi[i];
    mm += m[i];
  }
  const double b = mp / n - k * mm / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = phi[i] - k * m[i] - b;
  return out;
}

// Magnitude of the DFT of x at integer bin f.
inline double dft_magnitude(const std::vector<double>& x, std::size_t f) {
  std::complex<double> acc = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(f * t) / n);
  }
  return std::abs(acc);
}

// Upper-tail chi-square critical value at alpha = 0.01 for small dof.
inline double chi_square_99(std::size_t dof) {
  static const double table[] = {0.0,    6.635,  9.210,  11.345, 13.277, 15.086,
                                 16.812, 18.475, 20.090, 21.666, 23.209};
  return table[dof];
}

}  // namespace oracle
