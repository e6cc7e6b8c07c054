#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tuneprobe {

using Rng = std::mt19937_64;

struct Shape {
  int height = 0;
  int width = 0;

  std::size_t size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

/// A real-valued 2-D pattern stored row-major. The energy is the Euclidean
/// norm of the values and is cached at construction.
class Stimulus {
 public:
  Stimulus() = default;
  Stimulus(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return values_.size(); }
  double energy() const { return energy_; }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * shape_.width + col]; }

  friend bool operator==(const Stimulus& a, const Stimulus& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Shape shape_;
  std::vector<double> values_;
  double energy_ = 0.0;
};

/// Ordered, same-shape stimuli with optional integer class labels.
class StimulusSet {
 public:
  StimulusSet() = default;
  explicit StimulusSet(std::vector<Stimulus> items, std::vector<int> labels = {});

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool labeled() const { return !labels_.empty(); }
  const Shape& shape() const;

  const std::vector<Stimulus>& items() const { return items_; }
  const std::vector<int>& labels() const { return labels_; }
  const Stimulus& operator[](std::size_t i) const { return items_[i]; }
  int label(std::size_t i) const { return labels_.at(i); }

 private:
  std::vector<Stimulus> items_;
  std::vector<int> labels_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// E * x / |x|. Throws ZeroVector or NonFinite.
Stimulus project_sphere(std::span<const double> x, double energy, Shape shape);
void project_sphere_into(std::span<const double> x, double energy, std::span<double> out);

/// Cone projection around a fixed anchor: every output lies on the sphere of
/// the anchor's energy at angular distance delta from the anchor. Built once
/// per search and applied to many raw points.
class ConeProjector {
 public:
  ConeProjector(const Stimulus& anchor, double delta);

  double delta() const { return delta_; }
  const Stimulus& anchor() const { return anchor_; }

  /// Throws DegenerateDirection when x is (numerically) parallel to the anchor.
  void apply(std::span<const double> x, std::span<double> out) const;
  Stimulus apply(const Stimulus& x) const;

 private:
  Stimulus anchor_;
  std::vector<double> unit_;
  double delta_;
  double cos_;
  double sin_;
};

Stimulus project_cone(const Stimulus& x, const Stimulus& x_hat, double delta);

/// Pink-noise-like pattern: radial amplitude envelope f^(-alpha), uniform
/// random phases, zero DC, scaled to the given energy.
Stimulus sample_pink_noise(Shape shape, double alpha, double energy, Rng& rng);

/// A random direction orthogonal to x_hat with the same energy as x_hat.
Stimulus random_orthogonal_unit(const Stimulus& x_hat, Rng& rng);

/// Angle between two nonzero patterns, in [0, pi].
double angular_distance(const Stimulus& x, const Stimulus& y);

double average_energy(const StimulusSet& set);

/// Radial-coordinate point on the cone: E (cos d * u_hat + sin d * u_tilde).
Stimulus cone_point(const Stimulus& x_hat, const Stimulus& orthogonal, double delta);

// Serialization. CSV: line 1 "height,width", line 2 energy, then one row of
// values per image row. PGM: binary P5, min -> 0, max -> 255.
void write_csv(std::ostream& out, const Stimulus& s);
Stimulus read_csv(std::istream& in);
void write_pgm(std::ostream& out, const Stimulus& s);
/// Horizontal strip of same-shape stimuli separated by one-pixel gutters,
/// each panel scaled independently.
void write_pgm_strip(std::ostream& out, std::span<const Stimulus> panels);

}  // namespace tuneprobe
