#include "tuneprobe/targets.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "tuneprobe/error.hpp"
#include "tuneprobe/seeding.hpp"

namespace tuneprobe {

TargetHandle::TargetHandle(std::shared_ptr<const ResponseFunction> fn) : fn_(std::move(fn)) {
  if (!fn_) fail(ErrorKind::InvalidArgument, "target handle needs a response function");
}

void TargetHandle::evaluate_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != input_size()) {
    fail(ErrorKind::ShapeMismatch, "target expects " + std::to_string(input_size()) + " inputs, got " +
                                       std::to_string(x.size()));
  }
  if (out.size() != static_cast<std::size_t>(response_dim())) {
    fail(ErrorKind::ShapeMismatch, "response buffer has the wrong length");
  }
  fn_->respond(x, out);
}

ResponseVector TargetHandle::evaluate(std::span<const double> x) const {
  ResponseVector r(static_cast<std::size_t>(response_dim()));
  evaluate_into(x, r);
  return r;
}

ResponseVector TargetHandle::evaluate(const Stimulus& x) const {
  if (x.shape() != input_shape()) {
    fail(ErrorKind::ShapeMismatch, "target expects shape " + to_string(input_shape()) + ", got " +
                                       to_string(x.shape()));
  }
  return evaluate(x.values());
}

double TargetHandle::scalar(std::span<const double> x) const {
  if (response_dim() != 1) fail(ErrorKind::InvalidArgument, "scalar() needs a single-response target");
  double r = 0.0;
  evaluate_into(x, std::span<double>(&r, 1));
  return r;
}

namespace {

class FunctionTarget final : public ResponseFunction {
 public:
  FunctionTarget(Shape shape, int dim, std::function<void(std::span<const double>, std::span<double>)> fn,
                 std::string description)
      : shape_(shape), dim_(dim), fn_(std::move(fn)), description_(std::move(description)) {}

  Shape input_shape() const override { return shape_; }
  int response_dim() const override { return dim_; }
  void respond(std::span<const double> x, std::span<double> out) const override { fn_(x, out); }
  std::string describe() const override { return description_; }

 private:
  Shape shape_;
  int dim_;
  std::function<void(std::span<const double>, std::span<double>)> fn_;
  std::string description_;
};

class LinearNeuron final : public ResponseFunction {
 public:
  explicit LinearNeuron(const Stimulus& w) : w_(w) {}
  Shape input_shape() const override { return w_.shape(); }
  int response_dim() const override { return 1; }
  void respond(std::span<const double> x, std::span<double> out) const override { out[0] = dot(w_.values(), x); }
  std::string describe() const override { return "linear"; }

 private:
  Stimulus w_;
};

class QuadraticNeuron final : public ResponseFunction {
 public:
  QuadraticNeuron(Eigen::MatrixXd q, Eigen::VectorXd l, double c, Shape shape)
      : q_(std::move(q)), l_(std::move(l)), c_(c), shape_(shape) {}
  Shape input_shape() const override { return shape_; }
  int response_dim() const override { return 1; }
  void respond(std::span<const double> x, std::span<double> out) const override {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    out[0] = 0.5 * v.dot(q_ * v) + l_.dot(v) + c_;
  }
  std::string describe() const override { return "quadratic"; }

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd l_;
  double c_;
  Shape shape_;
};

class UnitView final : public ResponseFunction {
 public:
  UnitView(TargetHandle target, int index) : target_(std::move(target)), index_(index) {}
  Shape input_shape() const override { return target_.input_shape(); }
  int response_dim() const override { return 1; }
  void respond(std::span<const double> x, std::span<double> out) const override {
    thread_local ResponseVector buffer;
    buffer.resize(static_cast<std::size_t>(target_.response_dim()));
    target_.function()->respond(x, buffer);
    out[0] = buffer[static_cast<std::size_t>(index_)];
  }
  std::string describe() const override { return target_.describe() + "[" + std::to_string(index_) + "]"; }

 private:
  TargetHandle target_;
  int index_;
};

class MatchFitness final : public ResponseFunction {
 public:
  MatchFitness(TargetHandle target, ResponseVector ref) : target_(std::move(target)), ref_(std::move(ref)) {}
  Shape input_shape() const override { return target_.input_shape(); }
  int response_dim() const override { return 1; }
  void respond(std::span<const double> x, std::span<double> out) const override {
    thread_local ResponseVector buffer;
    buffer.resize(ref_.size());
    target_.function()->respond(x, buffer);
    double sq = 0.0;
    for (std::size_t i = 0; i < ref_.size(); ++i) {
      const double d = buffer[i] - ref_[i];
      sq += d * d;
    }
    out[0] = std::exp(-std::sqrt(sq));
  }
  std::string describe() const override { return "match(" + target_.describe() + ")"; }

 private:
  TargetHandle target_;
  ResponseVector ref_;
};

Shape square_or_row(std::size_t n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<std::size_t>(side) * static_cast<std::size_t>(side) == n) return {side, side};
  return {1, static_cast<int>(n)};
}

}  // namespace

TargetHandle make_target(Shape shape, int response_dim,
                         std::function<void(std::span<const double>, std::span<double>)> fn,
                         std::string description) {
  if (response_dim < 1) fail(ErrorKind::InvalidArgument, "response dimension must be positive");
  return TargetHandle(std::make_shared<FunctionTarget>(shape, response_dim, std::move(fn), std::move(description)));
}

TargetHandle linear_neuron(const Stimulus& w) {
  if (std::abs(w.energy() - 1.0) > 1e-9) fail(ErrorKind::InvalidArgument, "linear neuron weights must be unit norm");
  return TargetHandle(std::make_shared<LinearNeuron>(w));
}

TargetHandle quadratic_neuron(const Eigen::MatrixXd& q, const Eigen::VectorXd& l, double c, Shape shape) {
  const auto n = static_cast<Eigen::Index>(shape.size());
  if (q.rows() != n || q.cols() != n || l.size() != n) {
    fail(ErrorKind::ShapeMismatch, "quadratic neuron dimensions do not match shape " + to_string(shape));
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    fail(ErrorKind::Asymmetric, "quadratic form matrix is not symmetric");
  }
  return TargetHandle(std::make_shared<QuadraticNeuron>(q, l, c, shape));
}

TargetHandle quadratic_neuron(const Eigen::MatrixXd& q, const Eigen::VectorXd& l, double c) {
  return quadratic_neuron(q, l, c, square_or_row(static_cast<std::size_t>(q.rows())));
}

TargetHandle unit_view(const TargetHandle& target, int index) {
  if (index < 0 || index >= target.response_dim()) {
    fail(ErrorKind::IndexOutOfRange, "unit index " + std::to_string(index) + " outside [0, " +
                                         std::to_string(target.response_dim()) + ")");
  }
  return TargetHandle(std::make_shared<UnitView>(target, index));
}

TargetHandle match_fitness(const TargetHandle& target, const ResponseVector& r_ref) {
  if (r_ref.size() != static_cast<std::size_t>(target.response_dim())) {
    fail(ErrorKind::ShapeMismatch, "reference response has length " + std::to_string(r_ref.size()) +
                                       ", target has " + std::to_string(target.response_dim()));
  }
  return TargetHandle(std::make_shared<MatchFitness>(target, r_ref));
}

// ---------------------------------------------------------------------------

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Halfwave: return "halfwave";
    case Activation::Clipped: return "clipped";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity" || s == "off") return Activation::Identity;
  if (s == "halfwave") return Activation::Halfwave;
  if (s == "clipped") return Activation::Clipped;
  fail(ErrorKind::Config, "unknown activation '" + s + "'");
}

namespace {

int level_output_side(const LevelSpec& level, int in) {
  int side = in - level.kernel_size + 1;
  if (level.pool_size > 1) {
    if (side < level.pool_size || (side - level.pool_size) % level.pool_stride != 0) return -1;
    side = (side - level.pool_size) / level.pool_stride + 1;
  }
  if (level.normalize) side -= 2 * level.norm_radius;
  return side;
}

}  // namespace

int SthorSpec::receptive_field() const {
  int rf = 1;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (it->normalize) rf += 2 * it->norm_radius;
    if (it->pool_size > 1) rf = (rf - 1) * it->pool_stride + it->pool_size;
    rf += it->kernel_size - 1;
  }
  return rf;
}

Shape SthorSpec::input_shape() const {
  const int rf = receptive_field();
  return {rf, rf};
}

void SthorSpec::validate() const {
  if (levels.empty() || levels.size() > 2) fail(ErrorKind::InvalidArgument, "networks have one or two levels");
  for (const auto& l : levels) {
    if (l.kernel_size < 1 || l.kernel_size % 2 == 0) {
      fail(ErrorKind::InfeasibleGeometry, "kernel size must be a positive odd integer");
    }
    if (l.n_filters < 1) fail(ErrorKind::InvalidArgument, "n_filters must be positive");
    if (l.pool_size < 1 || l.pool_stride < 1) fail(ErrorKind::InfeasibleGeometry, "pool size and stride must be positive");
    if (!(l.pool_exponent > 0.0)) fail(ErrorKind::InvalidArgument, "pool exponent must be positive");
    if (l.normalize && (l.norm_radius < 0 || !(l.norm_strength >= 0.0) || !(l.norm_threshold > 0.0))) {
      fail(ErrorKind::InvalidArgument, "normalization needs radius >= 0, strength >= 0 and threshold > 0");
    }
    if (l.activation == Activation::Clipped && !(l.clip_lo < l.clip_hi)) {
      fail(ErrorKind::InvalidArgument, "clipped activation needs lo < hi");
    }
  }
  if (levels.back().n_filters != top_layer_neurons) {
    fail(ErrorKind::InvalidArgument, "top level must have top_layer_neurons filters");
  }
  int side = receptive_field();
  for (const auto& l : levels) {
    side = level_output_side(l, side);
    if (side < 1) fail(ErrorKind::InfeasibleGeometry, "level geometry does not tile the receptive field");
  }
  if (side != 1) fail(ErrorKind::InfeasibleGeometry, "top level must reduce the receptive field to one position");
}

SthorSpec default_sthor_spec(int levels, std::uint64_t weight_seed) {
  if (levels != 1 && levels != 2) fail(ErrorKind::InvalidArgument, "networks have one or two levels");
  SthorSpec spec;
  spec.weight_seed = weight_seed;
  LevelSpec level;
  level.kernel_size = 7;
  level.pool_size = 3;
  level.norm_radius = 1;
  if (levels == 2) {
    LevelSpec first = level;
    first.n_filters = 16;
    spec.levels.push_back(first);
  }
  level.n_filters = spec.top_layer_neurons;
  spec.levels.push_back(level);
  return spec;
}

namespace {

std::vector<Eigen::MatrixXd> draw_kernels(const SthorSpec& spec) {
  Rng rng(splitmix64(spec.weight_seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::MatrixXd> kernels;
  int in_channels = 1;
  for (const auto& level : spec.levels) {
    const int fan_in = in_channels * level.kernel_size * level.kernel_size;
    Eigen::MatrixXd w(fan_in, level.n_filters);
    for (int f = 0; f < level.n_filters; ++f) {
      for (int i = 0; i < fan_in; ++i) w(i, f) = gauss(rng);
      w.col(f).array() -= w.col(f).mean();
      const double n = w.col(f).norm();
      // fan_in == 1 leaves nothing after mean removal; keep a unit weight.
      if (n > 0.0) {
        w.col(f) /= n;
      } else {
        w.col(f).setOnes();
      }
    }
    kernels.push_back(std::move(w));
    in_channels = level.n_filters;
  }
  return kernels;
}

// Feature maps are stored positions x channels; each column is one channel's
// row-major spatial map.
struct Maps {
  int side = 0;
  Eigen::MatrixXd data;
};

void convolve(const Maps& in, const Eigen::MatrixXd& kernel, int k, Maps& out, Eigen::MatrixXd& patches) {
  const int channels = static_cast<int>(in.data.cols());
  const int side = in.side - k + 1;
  patches.resize(static_cast<Eigen::Index>(side) * side, static_cast<Eigen::Index>(channels) * k * k);
  for (int c = 0; c < channels; ++c) {
    const double* src = in.data.col(c).data();
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index col = (static_cast<Eigen::Index>(c) * k + ky) * k + kx;
        double* dst = patches.col(col).data();
        for (int y = 0; y < side; ++y) {
          const double* row = src + static_cast<std::ptrdiff_t>(y + ky) * in.side + kx;
          for (int x = 0; x < side; ++x) dst[y * side + x] = row[x];
        }
      }
    }
  }
  out.side = side;
  out.data.noalias() = patches * kernel;
}

void activate(const LevelSpec& level, Maps& maps) {
  switch (level.activation) {
    case Activation::Identity: break;
    case Activation::Halfwave: maps.data = maps.data.cwiseMax(0.0); break;
    case Activation::Clipped: maps.data = maps.data.cwiseMax(level.clip_lo).cwiseMin(level.clip_hi); break;
  }
}

void pool(const LevelSpec& level, const Maps& in, Maps& out) {
  const int s = level.pool_size;
  const int t = level.pool_stride;
  const int side = (in.side - s) / t + 1;
  const double p = level.pool_exponent;
  const auto channels = in.data.cols();
  out.side = side;
  out.data.resize(static_cast<Eigen::Index>(side) * side, channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const double* src = in.data.col(c).data();
    double* dst = out.data.col(c).data();
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < s; ++dy) {
          const double* row = src + static_cast<std::ptrdiff_t>(y * t + dy) * in.side + x * t;
          for (int dx = 0; dx < s; ++dx) {
            const double v = std::abs(row[dx]);
            if (p == 1.0) {
              acc += v;
            } else if (p == 2.0) {
              acc += v * v;
            } else {
              acc += std::pow(v, p);
            }
          }
        }
        dst[y * side + x] = p == 1.0 ? acc : (p == 2.0 ? std::sqrt(acc) : std::pow(acc, 1.0 / p));
      }
    }
  }
}

void normalize(const LevelSpec& level, const Maps& in, Maps& out) {
  const int r = level.norm_radius;
  const int side = in.side - 2 * r;
  const int width = 2 * r + 1;
  const Eigen::VectorXd energy = in.data.rowwise().squaredNorm();
  out.side = side;
  out.data.resize(static_cast<Eigen::Index>(side) * side, in.data.cols());
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      double local = 0.0;
      for (int dy = 0; dy < width; ++dy) {
        for (int dx = 0; dx < width; ++dx) local += energy[(y + dy) * in.side + (x + dx)];
      }
      const double scale = 1.0 / (level.norm_threshold + level.norm_strength * std::sqrt(local));
      out.data.row(y * side + x) = in.data.row((y + r) * in.side + (x + r)) * scale;
    }
  }
}

}  // namespace

SthorNetwork::SthorNetwork(SthorSpec spec) : SthorNetwork(spec, draw_kernels(spec)) {}

SthorNetwork::SthorNetwork(SthorSpec spec, std::vector<Eigen::MatrixXd> kernels)
    : spec_(std::move(spec)), kernels_(std::move(kernels)) {
  spec_.validate();
  shape_ = spec_.input_shape();
  if (kernels_.size() != spec_.levels.size()) fail(ErrorKind::InvalidArgument, "one kernel matrix per level");
  int in_channels = 1;
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    const auto& level = spec_.levels[i];
    if (kernels_[i].rows() != in_channels * level.kernel_size * level.kernel_size ||
        kernels_[i].cols() != level.n_filters) {
      fail(ErrorKind::ShapeMismatch, "kernel matrix " + std::to_string(i) + " has the wrong dimensions");
    }
    in_channels = level.n_filters;
  }
}

void SthorNetwork::respond(std::span<const double> x, std::span<double> out) const {
  thread_local Maps a;
  thread_local Maps b;
  thread_local Eigen::MatrixXd patches;
  a.side = shape_.height;
  a.data = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < spec_.levels.size(); ++i) {
    const auto& level = spec_.levels[i];
    convolve(a, kernels_[i], level.kernel_size, b, patches);
    activate(level, b);
    if (level.pool_size > 1) {
      pool(level, b, a);
    } else {
      std::swap(a, b);
    }
    if (level.normalize) {
      normalize(level, a, b);
      std::swap(a, b);
    }
  }
  // a is 1 x top_layer_neurons.
  for (int c = 0; c < spec_.top_layer_neurons; ++c) out[c] = a.data(0, c);
}

std::string SthorNetwork::describe() const {
  std::ostringstream os;
  os << "sthor L" << spec_.levels.size() << " " << to_string(shape_) << " seed " << spec_.weight_seed;
  return os.str();
}

std::shared_ptr<const SthorNetwork> make_sthor_network(const SthorSpec& spec) {
  return std::make_shared<const SthorNetwork>(spec);
}

TargetHandle sthor_network(const SthorSpec& spec) { return TargetHandle(make_sthor_network(spec)); }

NetworkPopulation sample_network_population(const SthorSpec& base, int n_networks, const HyperRanges& ranges,
                                            std::uint64_t seed) {
  if (n_networks < 1) fail(ErrorKind::InvalidArgument, "population needs at least one network");
  if (ranges.n_filters.empty() || ranges.pool_exponent.empty() || ranges.pool_size.empty() ||
      ranges.norm_strength.empty()) {
    fail(ErrorKind::InvalidArgument, "hyperparameter ranges must be non-empty");
  }
  base.validate();
  NetworkPopulation population;
  Rng rng(splitmix64(seed));
  auto pick = [&rng](const auto& values) {
    std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
    return values[d(rng)];
  };
  for (int i = 0; i < n_networks; ++i) {
    SthorSpec spec = base;
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
      auto& level = spec.levels[l];
      const int span = level.kernel_size + level.pool_size;
      const int filters = pick(ranges.n_filters);
      const int pool_size = pick(ranges.pool_size);
      level.pool_exponent = pick(ranges.pool_exponent);
      level.norm_strength = pick(ranges.norm_strength);
      if (l + 1 < spec.levels.size()) level.n_filters = filters;
      level.pool_size = pool_size;
      level.kernel_size = span - pool_size;
    }
    spec.weight_seed = derive_seed(seed, "network", static_cast<std::uint64_t>(i));
    spec.validate();
    population.handles.push_back(sthor_network(spec));
    population.manifest.push_back(std::move(spec));
  }
  return population;
}

}  // namespace tuneprobe
