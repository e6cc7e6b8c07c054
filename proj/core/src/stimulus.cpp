#include "tuneprobe/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "tuneprobe/error.hpp"
#include "tuneprobe/fourier.hpp"

namespace tuneprobe {

std::string to_string(const Shape& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width);
}

Stimulus::Stimulus(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (shape_.height < 1 || shape_.width < 1) {
    fail(ErrorKind::ShapeMismatch, "stimulus shape must be positive, got " + to_string(shape_));
  }
  if (values_.size() != shape_.size()) {
    fail(ErrorKind::ShapeMismatch, "stimulus of shape " + to_string(shape_) + " given " +
                                       std::to_string(values_.size()) + " values");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "stimulus value is not finite");
  }
  energy_ = norm(values_);
}

StimulusSet::StimulusSet(std::vector<Stimulus> items, std::vector<int> labels)
    : items_(std::move(items)), labels_(std::move(labels)) {
  if (items_.empty()) fail(ErrorKind::EmptySet, "stimulus set is empty");
  for (const auto& s : items_) {
    if (s.shape() != items_.front().shape()) {
      fail(ErrorKind::ShapeMismatch, "stimulus set mixes shapes " + to_string(s.shape()) + " and " +
                                         to_string(items_.front().shape()));
    }
  }
  if (!labels_.empty() && labels_.size() != items_.size()) {
    fail(ErrorKind::InvalidArgument, "label count does not match item count");
  }
}

const Shape& StimulusSet::shape() const {
  if (items_.empty()) fail(ErrorKind::EmptySet, "stimulus set is empty");
  return items_.front().shape();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::ShapeMismatch, "dot product of unequal lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

void project_sphere_into(std::span<const double> x, double energy, std::span<double> out) {
  if (!(energy > 0.0) || !std::isfinite(energy)) {
    fail(ErrorKind::InvalidArgument, "energy must be positive and finite");
  }
  double sq = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "cannot project a non-finite vector");
    sq += v * v;
  }
  if (sq == 0.0) fail(ErrorKind::ZeroVector, "cannot project the zero vector onto the sphere");
  const double scale = energy / std::sqrt(sq);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale;
}

Stimulus project_sphere(std::span<const double> x, double energy, Shape shape) {
  if (x.size() != shape.size()) fail(ErrorKind::ShapeMismatch, "raw vector length does not match shape");
  std::vector<double> out(x.size());
  project_sphere_into(x, energy, out);
  return Stimulus(shape, std::move(out));
}

ConeProjector::ConeProjector(const Stimulus& anchor, double delta)
    : anchor_(anchor), delta_(delta), cos_(std::cos(delta)), sin_(std::sin(delta)) {
  if (!(delta > 0.0) || delta > std::numbers::pi) {
    fail(ErrorKind::InvalidArgument, "cone angle must lie in (0, pi]");
  }
  if (anchor.energy() == 0.0) fail(ErrorKind::ZeroVector, "cone anchor is the zero vector");
  unit_.assign(anchor.values().begin(), anchor.values().end());
  for (double& v : unit_) v /= anchor.energy();
}

void ConeProjector::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t n = unit_.size();
  if (x.size() != n || out.size() != n) fail(ErrorKind::ShapeMismatch, "cone projection length mismatch");
  double along = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    along += unit_[i] * x[i];
    sq += x[i] * x[i];
  }
  if (!std::isfinite(sq)) fail(ErrorKind::NonFinite, "cannot project a non-finite vector");
  // |x - <u,x>u|, computed directly rather than via sq - along^2 to avoid
  // cancellation near the anchor.
  double ortho_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - along * unit_[i];
    ortho_sq += d * d;
  }
  const double ortho = std::sqrt(ortho_sq);
  if (ortho < 1e-12 * std::max(1.0, std::sqrt(sq))) {
    fail(ErrorKind::DegenerateDirection, "point is parallel to the cone axis");
  }
  const double e = anchor_.energy();
  const double a = e * cos_;
  const double b = e * sin_ / ortho;
  for (std::size_t i = 0; i < n; ++i) out[i] = a * unit_[i] + b * (x[i] - along * unit_[i]);
}

Stimulus ConeProjector::apply(const Stimulus& x) const {
  if (x.shape() != anchor_.shape()) fail(ErrorKind::ShapeMismatch, "cone projection shape mismatch");
  std::vector<double> out(x.size());
  apply(x.values(), out);
  return Stimulus(x.shape(), std::move(out));
}

Stimulus project_cone(const Stimulus& x, const Stimulus& x_hat, double delta) {
  return ConeProjector(x_hat, delta).apply(x);
}

Stimulus sample_pink_noise(Shape shape, double alpha, double energy, Rng& rng) {
  if (shape.height < 1 || shape.width < 1) fail(ErrorKind::ShapeMismatch, "pink noise needs a positive shape");
  if (shape.size() < 2) fail(ErrorKind::ShapeMismatch, "pink noise needs at least two pixels");
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<Complex> spectrum(shape.size());
  for (int ky = 0; ky < shape.height; ++ky) {
    const double fy = signed_frequency(ky, shape.height);
    for (int kx = 0; kx < shape.width; ++kx) {
      const double fx = signed_frequency(kx, shape.width);
      const double f = std::hypot(fx, fy);
      const double p = phase(rng);
      const double amplitude = f > 0.0 ? std::pow(f, -alpha) : 0.0;
      spectrum[static_cast<std::size_t>(ky) * shape.width + kx] = std::polar(amplitude, p);
    }
  }
  const auto image = dft2(spectrum, shape, true);
  std::vector<double> real(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) real[i] = image[i].real();
  // The real part of a zero-DC spectrum still has zero mean; remove rounding.
  double mean = 0.0;
  for (double v : real) mean += v;
  mean /= static_cast<double>(real.size());
  for (double& v : real) v -= mean;
  return project_sphere(real, energy, shape);
}

Stimulus random_orthogonal_unit(const Stimulus& x_hat, Rng& rng) {
  const std::size_t n = x_hat.size();
  if (n < 2) fail(ErrorKind::InvalidArgument, "an orthogonal direction needs at least two dimensions");
  if (x_hat.energy() == 0.0) fail(ErrorKind::ZeroVector, "anchor is the zero vector");
  std::vector<double> unit(x_hat.values().begin(), x_hat.values().end());
  for (double& v : unit) v /= x_hat.energy();

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> g(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (auto& v : g) v = gauss(rng);
    const double before = norm(g);
    // Two Gram-Schmidt passes keep the residual at rounding level.
    for (int pass = 0; pass < 2; ++pass) {
      const double along = dot(unit, g);
      for (std::size_t i = 0; i < n; ++i) g[i] -= along * unit[i];
    }
    if (norm(g) > 1e-6 * before) return project_sphere(g, x_hat.energy(), x_hat.shape());
  }
  fail(ErrorKind::ImprobableFailure, "could not draw a direction orthogonal to the anchor");
}

double angular_distance(const Stimulus& x, const Stimulus& y) {
  if (x.shape() != y.shape()) fail(ErrorKind::ShapeMismatch, "angular distance between different shapes");
  if (x.energy() == 0.0 || y.energy() == 0.0) fail(ErrorKind::ZeroVector, "angular distance to the zero vector");
  const double c = dot(x.values(), y.values()) / (x.energy() * y.energy());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double average_energy(const StimulusSet& set) {
  if (set.empty()) fail(ErrorKind::EmptySet, "average energy of an empty set");
  double sum = 0.0;
  for (const auto& s : set.items()) sum += s.energy();
  return sum / static_cast<double>(set.size());
}

Stimulus cone_point(const Stimulus& x_hat, const Stimulus& orthogonal, double delta) {
  if (x_hat.shape() != orthogonal.shape()) fail(ErrorKind::ShapeMismatch, "cone point shape mismatch");
  const double a = std::cos(delta);
  const double b = std::sin(delta) * x_hat.energy() / orthogonal.energy();
  std::vector<double> out(x_hat.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x_hat[i] + b * orthogonal[i];
  return Stimulus(x_hat.shape(), std::move(out));
}

void write_csv(std::ostream& out, const Stimulus& s) {
  const auto old_precision = out.precision(17);
  out << s.height() << ',' << s.width() << '\n' << s.energy() << '\n';
  for (int r = 0; r < s.height(); ++r) {
    for (int c = 0; c < s.width(); ++c) {
      if (c) out << ',';
      out << s.at(r, c);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

Stimulus read_csv(std::istream& in) {
  std::string line;
  Shape shape;
  char comma = 0;
  if (!std::getline(in, line)) fail(ErrorKind::Io, "stimulus CSV is empty");
  {
    std::istringstream header(line);
    if (!(header >> shape.height >> comma >> shape.width) || comma != ',') {
      fail(ErrorKind::Io, "stimulus CSV header must be 'height,width'");
    }
  }
  double energy = 0.0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> energy)) {
    fail(ErrorKind::Io, "stimulus CSV is missing the energy line");
  }
  std::vector<double> values;
  values.reserve(shape.size());
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::Io, "malformed value '" + cell + "' in stimulus CSV");
      }
    }
  }
  Stimulus s(shape, std::move(values));
  if (std::abs(s.energy() - energy) > 1e-9 * std::max(1.0, energy)) {
    fail(ErrorKind::Io, "stimulus CSV energy line disagrees with its values");
  }
  return s;
}

namespace {

std::vector<unsigned char> to_gray(const Stimulus& s) {
  const auto [lo_it, hi_it] = std::minmax_element(s.values().begin(), s.values().end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  std::vector<unsigned char> gray(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = span > 0.0 ? (s[i] - lo) / span : 0.5;
    gray[i] = static_cast<unsigned char>(std::lround(255.0 * t));
  }
  return gray;
}

}  // namespace

void write_pgm(std::ostream& out, const Stimulus& s) {
  const auto gray = to_gray(s);
  out << "P5\n" << s.width() << ' ' << s.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

void write_pgm_strip(std::ostream& out, std::span<const Stimulus> panels) {
  if (panels.empty()) fail(ErrorKind::EmptySet, "no panels to write");
  const Shape shape = panels.front().shape();
  const int n = static_cast<int>(panels.size());
  const int width = n * shape.width + (n - 1);
  std::vector<unsigned char> canvas(static_cast<std::size_t>(width) * shape.height, 0);
  for (int p = 0; p < n; ++p) {
    if (panels[p].shape() != shape) fail(ErrorKind::ShapeMismatch, "strip panels differ in shape");
    const auto gray = to_gray(panels[p]);
    const int x0 = p * (shape.width + 1);
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        canvas[static_cast<std::size_t>(r) * width + x0 + c] = gray[static_cast<std::size_t>(r) * shape.width + c];
      }
    }
  }
  out << "P5\n" << width << ' ' << shape.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(canvas.data()), static_cast<std::streamsize>(canvas.size()));
}

}  // namespace tuneprobe
