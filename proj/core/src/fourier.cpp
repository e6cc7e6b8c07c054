#include "tuneprobe/fourier.hpp"

#include <cmath>
#include <numbers>

namespace tuneprobe {
namespace {

std::vector<Complex> twiddles(int n, bool inverse) {
  std::vector<Complex> w(static_cast<std::size_t>(n));
  const double sign = inverse ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * k / n;
    w[k] = {std::cos(angle), std::sin(angle)};
  }
  return w;
}

// In-place 1-D DFT of `n` elements spaced `stride` apart.
void dft1(Complex* data, int n, int stride, const std::vector<Complex>& w, std::vector<Complex>& scratch) {
  scratch.assign(static_cast<std::size_t>(n), Complex{});
  for (int k = 0; k < n; ++k) {
    Complex acc{};
    for (int j = 0; j < n; ++j) {
      acc += data[static_cast<std::ptrdiff_t>(j) * stride] * w[(static_cast<long>(j) * k) % n];
    }
    scratch[k] = acc;
  }
  for (int k = 0; k < n; ++k) data[static_cast<std::ptrdiff_t>(k) * stride] = scratch[k];
}

}  // namespace

std::vector<Complex> dft2(std::span<const Complex> data, Shape shape, bool inverse) {
  std::vector<Complex> out(data.begin(), data.end());
  const auto wr = twiddles(shape.width, inverse);
  const auto wc = twiddles(shape.height, inverse);
  std::vector<Complex> scratch;
  for (int r = 0; r < shape.height; ++r) {
    dft1(out.data() + static_cast<std::ptrdiff_t>(r) * shape.width, shape.width, 1, wr, scratch);
  }
  for (int c = 0; c < shape.width; ++c) {
    dft1(out.data() + c, shape.height, shape.width, wc, scratch);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(shape.size());
    for (auto& v : out) v *= scale;
  }
  return out;
}

std::vector<Complex> dft2(std::span<const double> data, Shape shape) {
  std::vector<Complex> complex(data.begin(), data.end());
  return dft2(complex, shape, false);
}

double signed_frequency(int k, int n) {
  const int signed_k = (k <= n / 2) ? k : k - n;
  return static_cast<double>(signed_k) / n;
}

}  // namespace tuneprobe
