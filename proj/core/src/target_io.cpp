#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tuneprobe/error.hpp"
#include "tuneprobe/targets.hpp"

namespace tuneprobe {

using nlohmann::json;

namespace {

json level_to_json(const LevelSpec& l) {
  return json{
      {"kernel_size", l.kernel_size},
      {"n_filters", l.n_filters},
      {"activation", to_string(l.activation)},
      {"clip_lo", l.clip_lo},
      {"clip_hi", l.clip_hi},
      {"pool", {{"size", l.pool_size}, {"stride", l.pool_stride}, {"exponent", l.pool_exponent}}},
      {"normalization",
       {{"enabled", l.normalize}, {"radius", l.norm_radius}, {"strength", l.norm_strength},
        {"threshold", l.norm_threshold}}},
  };
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

LevelSpec level_from_json(const json& j) {
  LevelSpec l;
  l.kernel_size = get_or(j, "kernel_size", l.kernel_size);
  l.n_filters = get_or(j, "n_filters", l.n_filters);
  l.activation = activation_from_string(get_or<std::string>(j, "activation", to_string(l.activation)));
  l.clip_lo = get_or(j, "clip_lo", l.clip_lo);
  l.clip_hi = get_or(j, "clip_hi", l.clip_hi);
  if (const auto p = j.find("pool"); p != j.end()) {
    l.pool_size = get_or(*p, "size", l.pool_size);
    l.pool_stride = get_or(*p, "stride", l.pool_stride);
    l.pool_exponent = get_or(*p, "exponent", l.pool_exponent);
  }
  if (const auto n = j.find("normalization"); n != j.end()) {
    l.normalize = get_or(*n, "enabled", l.normalize);
    l.norm_radius = get_or(*n, "radius", l.norm_radius);
    l.norm_strength = get_or(*n, "strength", l.norm_strength);
    l.norm_threshold = get_or(*n, "threshold", l.norm_threshold);
  }
  return l;
}

json spec_to_json(const SthorSpec& spec) {
  json levels = json::array();
  for (const auto& l : spec.levels) levels.push_back(level_to_json(l));
  const Shape shape = spec.input_shape();
  return json{{"levels", levels},
              {"top_layer_neurons", spec.top_layer_neurons},
              {"weight_seed", spec.weight_seed},
              {"input_shape", {shape.height, shape.width}}};
}

SthorSpec spec_from_json(const json& j) {
  SthorSpec spec;
  if (!j.contains("levels") || !j["levels"].is_array()) fail(ErrorKind::Config, "network spec needs a 'levels' array");
  for (const auto& l : j["levels"]) spec.levels.push_back(level_from_json(l));
  spec.top_layer_neurons = get_or(j, "top_layer_neurons", spec.top_layer_neurons);
  spec.weight_seed = get_or<std::uint64_t>(j, "weight_seed", 0);
  if (const auto s = j.find("input_shape"); s != j.end()) {
    const Shape declared{(*s).at(0).get<int>(), (*s).at(1).get<int>()};
    if (declared != spec.input_shape()) {
      fail(ErrorKind::InfeasibleGeometry, "declared input_shape " + to_string(declared) +
                                               " does not match the composed receptive field " +
                                               to_string(spec.input_shape()));
    }
  }
  spec.validate();
  return spec;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("bad network description: ") + e.what());
  }
}

constexpr char kMagic[4] = {'T', 'P', 'N', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorKind::Io, "truncated weight file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(ErrorKind::Io, "truncated weight file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

std::string sthor_spec_to_json(const SthorSpec& spec, int indent) { return spec_to_json(spec).dump(indent); }

SthorSpec sthor_spec_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] { return spec_from_json(j); });
}

std::string manifest_to_json(std::span<const SthorSpec> manifest, int indent) {
  json networks = json::array();
  for (const auto& spec : manifest) networks.push_back(spec_to_json(spec));
  return json{{"networks", networks}}.dump(indent);
}

std::vector<SthorSpec> manifest_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    std::vector<SthorSpec> out;
    for (const auto& n : j.at("networks")) out.push_back(spec_from_json(n));
    return out;
  });
}

std::string hyper_ranges_to_json(const HyperRanges& r, int indent) {
  return json{{"n_filters", r.n_filters},
              {"pool_exponent", r.pool_exponent},
              {"pool_size", r.pool_size},
              {"norm_strength", r.norm_strength}}
      .dump(indent);
}

HyperRanges hyper_ranges_from_json(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    HyperRanges r;
    r.n_filters = get_or(j, "n_filters", r.n_filters);
    r.pool_exponent = get_or(j, "pool_exponent", r.pool_exponent);
    r.pool_size = get_or(j, "pool_size", r.pool_size);
    r.norm_strength = get_or(j, "norm_strength", r.norm_strength);
    return r;
  });
}

void write_weights(std::ostream& out, const SthorNetwork& net) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(net.kernels().size()));
  put_u32(out, 0);
  for (const auto& k : net.kernels()) {
    put_u32(out, static_cast<std::uint32_t>(k.rows()));
    put_u32(out, static_cast<std::uint32_t>(k.cols()));
    for (Eigen::Index i = 0; i < k.size(); ++i) put_f64(out, k.data()[i]);
  }
  if (!out) fail(ErrorKind::Io, "failed writing weights");
}

std::vector<Eigen::MatrixXd> read_weights(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::Io, "not a weight file");
  if (get_u32(in) != kVersion) fail(ErrorKind::Io, "unsupported weight file version");
  const std::uint32_t levels = get_u32(in);
  get_u32(in);
  if (levels == 0 || levels > 2) fail(ErrorKind::Io, "weight file level count out of range");
  std::vector<Eigen::MatrixXd> out;
  for (std::uint32_t l = 0; l < levels; ++l) {
    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    Eigen::MatrixXd k(rows, cols);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = get_f64(in);
    out.push_back(std::move(k));
  }
  return out;
}

}  // namespace tuneprobe
