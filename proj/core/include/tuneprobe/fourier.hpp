#pragma once

#include <complex>
#include <span>
#include <vector>

#include "tuneprobe/stimulus.hpp"

namespace tuneprobe {

using Complex = std::complex<double>;

/// Separable 2-D DFT over a row-major height x width grid. The inverse
/// transform includes the 1/(height*width) factor. Sizes here are small
/// receptive fields, so a direct transform with cached twiddles is enough.
std::vector<Complex> dft2(std::span<const Complex> data, Shape shape, bool inverse = false);
std::vector<Complex> dft2(std::span<const double> data, Shape shape);

/// Signed frequency of bin k in a length-n transform, in cycles per sample.
double signed_frequency(int k, int n);

}  // namespace tuneprobe
