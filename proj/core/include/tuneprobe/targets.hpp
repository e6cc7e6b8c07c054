#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tuneprobe/stimulus.hpp"

namespace tuneprobe {

using ResponseVector = std::vector<double>;

/// A black-box stimulus -> response map. Implementations must be pure and
/// safe to call concurrently.
class ResponseFunction {
 public:
  virtual ~ResponseFunction() = default;
  virtual Shape input_shape() const = 0;
  virtual int response_dim() const = 0;
  virtual void respond(std::span<const double> x, std::span<double> out) const = 0;
  virtual std::string describe() const { return "opaque"; }
};

/// Immutable, cheaply copyable handle to a response function.
class TargetHandle {
 public:
  TargetHandle() = default;
  explicit TargetHandle(std::shared_ptr<const ResponseFunction> fn);

  Shape input_shape() const { return fn_->input_shape(); }
  int response_dim() const { return fn_->response_dim(); }
  std::size_t input_size() const { return input_shape().size(); }
  std::string describe() const { return fn_->describe(); }
  bool valid() const { return static_cast<bool>(fn_); }

  ResponseVector evaluate(const Stimulus& x) const;
  ResponseVector evaluate(std::span<const double> x) const;
  void evaluate_into(std::span<const double> x, std::span<double> out) const;
  /// For R = 1 targets.
  double scalar(std::span<const double> x) const;

  const std::shared_ptr<const ResponseFunction>& function() const { return fn_; }

 private:
  std::shared_ptr<const ResponseFunction> fn_;
};

/// Wraps an arbitrary callable. Used for fixtures and ad-hoc targets; the
/// callable must be pure.
TargetHandle make_target(Shape shape, int response_dim,
                         std::function<void(std::span<const double>, std::span<double>)> fn,
                         std::string description = "custom");

/// f(x) = <w, x>; w must have unit norm.
TargetHandle linear_neuron(const Stimulus& w);

/// f(x) = 1/2 x^T Q x + L^T x + c. Q must be symmetric within 1e-9.
TargetHandle quadratic_neuron(const Eigen::MatrixXd& q, const Eigen::VectorXd& l, double c, Shape shape);
TargetHandle quadratic_neuron(const Eigen::MatrixXd& q, const Eigen::VectorXd& l, double c);

/// Component `index` of a vector-valued target.
TargetHandle unit_view(const TargetHandle& target, int index);

/// exp(-|f(x) - r_ref|_2), in (0, 1].
TargetHandle match_fitness(const TargetHandle& target, const ResponseVector& r_ref);

// ---------------------------------------------------------------------------
// Random convolutional cascades.

enum class Activation { Identity, Halfwave, Clipped };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct LevelSpec {
  int kernel_size = 7;
  int n_filters = 32;
  Activation activation = Activation::Halfwave;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  int pool_size = 3;
  int pool_stride = 1;
  double pool_exponent = 2.0;
  bool normalize = true;
  int norm_radius = 1;
  double norm_strength = 1.0;
  double norm_threshold = 0.1;

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

/// One- or two-level cascade of convolution, activation, p-norm pooling and
/// divisive normalization. All stages are "valid" mode; the composed receptive
/// field is the input shape and the top level has a single spatial position
/// per channel.
struct SthorSpec {
  std::vector<LevelSpec> levels;
  int top_layer_neurons = 32;
  std::uint64_t weight_seed = 0;

  /// Receptive-field side length implied by the level geometry.
  int receptive_field() const;
  Shape input_shape() const;
  /// Throws InfeasibleGeometry or InvalidArgument.
  void validate() const;

  friend bool operator==(const SthorSpec&, const SthorSpec&) = default;
};

/// Defaults: L1 sees 11x11 (N=121), L2 sees 21x21 (N=441), 32 top units.
SthorSpec default_sthor_spec(int levels, std::uint64_t weight_seed = 0);

class SthorNetwork final : public ResponseFunction {
 public:
  /// Draws zero-mean, unit-norm Gaussian kernels from spec.weight_seed.
  explicit SthorNetwork(SthorSpec spec);
  /// Uses the given kernels: one (in_channels*k*k) x n_filters matrix per level.
  SthorNetwork(SthorSpec spec, std::vector<Eigen::MatrixXd> kernels);

  Shape input_shape() const override { return shape_; }
  int response_dim() const override { return spec_.top_layer_neurons; }
  void respond(std::span<const double> x, std::span<double> out) const override;
  std::string describe() const override;

  const SthorSpec& spec() const { return spec_; }
  const std::vector<Eigen::MatrixXd>& kernels() const { return kernels_; }

 private:
  SthorSpec spec_;
  Shape shape_;
  std::vector<Eigen::MatrixXd> kernels_;
};

TargetHandle sthor_network(const SthorSpec& spec);
std::shared_ptr<const SthorNetwork> make_sthor_network(const SthorSpec& spec);

/// Discrete sets each hyperparameter is drawn from, uniformly and
/// independently per level. Pool size changes are absorbed by the kernel
/// size so every level keeps the base receptive field.
struct HyperRanges {
  std::vector<int> n_filters{8, 16, 32};
  std::vector<double> pool_exponent{1.0, 2.0, 10.0};
  std::vector<int> pool_size{3, 5};
  std::vector<double> norm_strength{0.1, 1.0, 10.0};
};

struct NetworkPopulation {
  std::vector<SthorSpec> manifest;
  std::vector<TargetHandle> handles;
};

NetworkPopulation sample_network_population(const SthorSpec& base, int n_networks, const HyperRanges& ranges,
                                            std::uint64_t seed);

// Serialization: specs and manifests as JSON text, weights as a flat binary
// file ("TPNW", u32 version, u32 level count, u32 reserved, then per level
// u32 rows, u32 cols and rows*cols little-endian doubles, column-major).
std::string sthor_spec_to_json(const SthorSpec& spec, int indent = 2);
SthorSpec sthor_spec_from_json(const std::string& text);
std::string manifest_to_json(std::span<const SthorSpec> manifest, int indent = 2);
std::vector<SthorSpec> manifest_from_json(const std::string& text);
std::string hyper_ranges_to_json(const HyperRanges& ranges, int indent = 2);
HyperRanges hyper_ranges_from_json(const std::string& text);
void write_weights(std::ostream& out, const SthorNetwork& net);
std::vector<Eigen::MatrixXd> read_weights(std::istream& in);

}  // namespace tuneprobe
