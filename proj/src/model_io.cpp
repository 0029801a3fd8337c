#include "trea/model_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "trea/errors.hpp"

namespace trea {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "TREA-MODEL\n";
constexpr std::string_view kLengthKey = "manifest-bytes: ";

std::string activation_name(const std::optional<AfSelect>& a) { return a ? std::string(to_string(*a)) : "none"; }

void append_mask(std::string& out, const SparsityMask& m) {
  std::uint8_t byte = 0;
  int bit = 0;
  for (std::uint8_t k : m.keep) {
    if (k) byte |= static_cast<std::uint8_t>(1u << bit);
    if (++bit == 8) {
      out.push_back(static_cast<char>(byte));
      byte = 0;
      bit = 0;
    }
  }
  if (bit != 0) out.push_back(static_cast<char>(byte));
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw FormatError("model file: " + path + ": " + why);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

template <class T>
T get(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    fail(path + "." + key, "wrong type");
  }
}

std::size_t check_range(std::uint64_t offset, std::uint64_t bytes, std::size_t blob_size, const std::string& path) {
  if (offset > blob_size || bytes > blob_size - offset) fail(path, "tensor extends past the end of the blob");
  return static_cast<std::size_t>(offset);
}

}  // namespace

void append_f64_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_f64_le(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + static_cast<std::size_t>(b)])) << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

std::string serialize_model(const NetworkDescriptor& model) {
  std::string blob;
  json manifest;
  manifest["name"] = model.name;
  manifest["version"] = kModelFormatVersion;
  manifest["seed"] = model.seed;
  manifest["input_shape"] = {model.input_shape.channels, model.input_shape.height, model.input_shape.width};
  json layers = json::array();
  for (const auto& l : model.layers) {
    json jl;
    jl["kind"] = std::string(to_string(l.kind));
    jl["in_channels"] = l.in_channels;
    jl["out_channels"] = l.out_channels;
    jl["kernel"] = {l.kernel_h, l.kernel_w};
    jl["stride"] = l.stride;
    jl["padding"] = std::string(to_string(l.padding));
    jl["activation"] = activation_name(l.activation);
    jl["precision"] = std::string(to_string(l.precision));
    jl["mn_scale"] = l.mn_scale;
    jl["weight_offset"] = blob.size();
    jl["weight_count"] = l.weights.size();
    for (double w : l.weights) append_f64_le(blob, w);
    jl["bias_offset"] = blob.size();
    jl["bias_count"] = l.bias.size();
    for (double b : l.bias) append_f64_le(blob, b);
    if (l.mask) {
      jl["mask_offset"] = blob.size();
      jl["mask_retained_per_window"] = l.mask->retained_per_window;
      append_mask(blob, *l.mask);
    } else {
      jl["mask_offset"] = nullptr;
    }
    layers.push_back(std::move(jl));
  }
  manifest["layers"] = std::move(layers);
  manifest["blob_bytes"] = blob.size();

  const std::string text = manifest.dump(2) + "\n";
  std::string out(kMagic);
  out += std::string(kLengthKey) + std::to_string(text.size()) + "\n";
  out += text;
  out += blob;
  return out;
}

NetworkDescriptor deserialize_model(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) fail("header", "not a model file");
  std::size_t pos = kMagic.size();
  if (bytes.compare(pos, kLengthKey.size(), kLengthKey) != 0) fail("header.manifest-bytes", "missing");
  pos += kLengthKey.size();
  const std::size_t eol = bytes.find('\n', pos);
  if (eol == std::string::npos) fail("header.manifest-bytes", "truncated");
  std::size_t manifest_len = 0;
  try {
    std::size_t used = 0;
    manifest_len = std::stoull(bytes.substr(pos, eol - pos), &used);
    if (used != eol - pos) fail("header.manifest-bytes", "not a number");
  } catch (const std::logic_error&) {
    fail("header.manifest-bytes", "not a number");
  }
  pos = eol + 1;
  if (manifest_len > bytes.size() - pos) fail("manifest", "truncated");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(pos, manifest_len));
  } catch (const json::parse_error& e) {
    fail("manifest", std::string("invalid JSON: ") + e.what());
  }
  const std::string blob = bytes.substr(pos + manifest_len);

  const int version = get<int>(manifest, "version", "");
  if (version != kModelFormatVersion) fail(".version", "unsupported version " + std::to_string(version));
  const auto blob_bytes = get<std::uint64_t>(manifest, "blob_bytes", "");
  if (blob_bytes != blob.size()) {
    fail(".blob_bytes", "declares " + std::to_string(blob_bytes) + " bytes, file holds " + std::to_string(blob.size()));
  }

  NetworkDescriptor net;
  net.name = get<std::string>(manifest, "name", "");
  net.seed = get<std::uint64_t>(manifest, "seed", "");
  net.version = version;
  const auto shape = get<std::vector<int>>(manifest, "input_shape", "");
  if (shape.size() != 3) fail(".input_shape", "expected [channels, height, width]");
  net.input_shape = Shape{shape[0], shape[1], shape[2]};

  const json& layers = field(manifest, "layers", "");
  if (!layers.is_array()) fail(".layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = ".layers[" + std::to_string(i) + "]";
    const json& jl = layers[i];
    LayerDescriptor l;
    const auto kind = get<std::string>(jl, "kind", p);
    if (kind == "conv2d") {
      l.kind = LayerKind::kConv2d;
    } else if (kind == "dense") {
      l.kind = LayerKind::kDense;
    } else {
      fail(p + ".kind", "unknown kind '" + kind + "'");
    }
    l.in_channels = get<int>(jl, "in_channels", p);
    l.out_channels = get<int>(jl, "out_channels", p);
    const auto kernel = get<std::vector<int>>(jl, "kernel", p);
    if (kernel.size() != 2) fail(p + ".kernel", "expected [h, w]");
    l.kernel_h = kernel[0];
    l.kernel_w = kernel[1];
    l.stride = get<int>(jl, "stride", p);
    const auto padding = get<std::string>(jl, "padding", p);
    if (padding == "same") {
      l.padding = Padding::kSame;
    } else if (padding == "valid") {
      l.padding = Padding::kValid;
    } else {
      fail(p + ".padding", "unknown padding '" + padding + "'");
    }
    const auto act = get<std::string>(jl, "activation", p);
    if (act != "none") {
      try {
        l.activation = parse_af_select(act);
      } catch (const InvalidSelect&) {
        fail(p + ".activation", "unknown activation '" + act + "'");
      }
    }
    try {
      l.precision = parse_mac_mode(get<std::string>(jl, "precision", p));
    } catch (const DomainError&) {
      fail(p + ".precision", "unknown precision");
    }
    l.mn_scale = get<double>(jl, "mn_scale", p);
    if (l.in_channels < 1 || l.out_channels < 1 || l.kernel_h < 1 || l.kernel_w < 1 || l.stride < 1) {
      fail(p, "dimensions must be positive");
    }

    const auto w_off = get<std::uint64_t>(jl, "weight_offset", p);
    const auto w_cnt = get<std::uint64_t>(jl, "weight_count", p);
    if (w_cnt != l.weight_count()) fail(p + ".weight_count", "does not match layer dimensions");
    std::size_t at = check_range(w_off, w_cnt * 8, blob.size(), p + ".weight_offset");
    l.weights.resize(w_cnt);
    for (auto& w : l.weights) {
      w = read_f64_le(blob, at);
      at += 8;
    }
    const auto b_off = get<std::uint64_t>(jl, "bias_offset", p);
    const auto b_cnt = get<std::uint64_t>(jl, "bias_count", p);
    if (b_cnt != static_cast<std::uint64_t>(l.out_channels)) fail(p + ".bias_count", "does not match out_channels");
    at = check_range(b_off, b_cnt * 8, blob.size(), p + ".bias_offset");
    l.bias.resize(b_cnt);
    for (auto& b : l.bias) {
      b = read_f64_le(blob, at);
      at += 8;
    }
    const json& mask_off = field(jl, "mask_offset", p);
    if (!mask_off.is_null()) {
      if (!mask_off.is_number_unsigned()) fail(p + ".mask_offset", "wrong type");
      SparsityMask m;
      m.out_channels = l.out_channels;
      m.in_channels = l.in_channels;
      m.kernel_h = l.kernel_h;
      m.kernel_w = l.kernel_w;
      m.retained_per_window = get<int>(jl, "mask_retained_per_window", p);
      const std::size_t n = l.weight_count();
      at = check_range(mask_off.get<std::uint64_t>(), (n + 7) / 8, blob.size(), p + ".mask_offset");
      m.keep.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        m.keep[k] = (static_cast<unsigned char>(blob[at + k / 8]) >> (k % 8)) & 1u;
      }
      for (std::size_t w = 0; w < m.window_count(); ++w) {
        int kept = 0;
        for (auto f : m.window(static_cast<int>(w / m.in_channels), static_cast<int>(w % m.in_channels))) kept += f;
        if (kept != m.retained_per_window) fail(p + ".mask_retained_per_window", "window count disagrees with mask bits");
      }
      l.mask = std::move(m);
    }
    net.layers.push_back(std::move(l));
  }
  try {
    net.validate();
  } catch (const Error& e) {
    fail(".layers", e.what());
  }
  return net;
}

void save_model(const NetworkDescriptor& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

NetworkDescriptor load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace trea
