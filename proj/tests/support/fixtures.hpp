#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tuneprobe/stimulus.hpp"
#include "tuneprobe/targets.hpp"

namespace tuneprobe::testing {

inline std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

inline Stimulus random_stimulus(Shape shape, std::uint64_t seed, double energy = 1.0) {
  return project_sphere(gaussian_vector(shape.size(), seed), energy, shape);
}

inline Stimulus basis_vector(Shape shape, std::size_t index, double energy = 1.0) {
  std::vector<double> v(shape.size(), 0.0);
  v[index] = energy;
  return Stimulus(shape, std::move(v));
}

inline double cosine(const Stimulus& a, const Stimulus& b) {
  return dot(a.values(), b.values()) / (a.energy() * b.energy());
}

inline TargetHandle random_linear_neuron(Shape shape, std::uint64_t seed) {
  return linear_neuron(random_stimulus(shape, seed));
}

/// Symmetric matrix with a random orthonormal eigenbasis (columns of
/// `basis`) and eigenvalues 5, 4, then evenly spread in [-1, 1], then -4, -5.
struct QuadraticFixture {
  Eigen::MatrixXd q;
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
};

inline QuadraticFixture quadratic_fixture(int n, std::uint64_t seed) {
  const auto g = gaussian_vector(static_cast<std::size_t>(n) * n, seed);
  const Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(g.data(), n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  QuadraticFixture f;
  f.basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  f.eigenvalues.resize(n);
  f.eigenvalues(0) = 5.0;
  f.eigenvalues(1) = 4.0;
  for (int i = 2; i < n - 2; ++i) f.eigenvalues(i) = 1.0 - 2.0 * (i - 2) / std::max(1, n - 5);
  f.eigenvalues(n - 2) = -4.0;
  f.eigenvalues(n - 1) = -5.0;
  f.q = f.basis * f.eigenvalues.asDiagonal() * f.basis.transpose();
  f.q = (f.q + f.q.transpose()).eval() / 2.0;
  return f;
}

/// Fraction of the part of x orthogonal to x_hat that lies in span(cols).
inline double energy_fraction_in_span(const Stimulus& x, const Stimulus& x_hat, const Eigen::MatrixXd& cols) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> xv(x.values().data(), n);
  const Eigen::Map<const Eigen::VectorXd> hv(x_hat.values().data(), n);
  const Eigen::VectorXd u = hv.normalized();
  const Eigen::VectorXd rest = xv - u.dot(xv) * u;
  const Eigen::VectorXd inside = cols * (cols.transpose() * rest);
  return inside.squaredNorm() / rest.squaredNorm();
}

}  // namespace tuneprobe::testing
