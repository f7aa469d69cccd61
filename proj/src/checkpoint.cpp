#include "tongueage/checkpoint.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "tongueage/errors.hpp"

namespace tongueage {

namespace {

constexpr std::size_t kMagicLen = 6;
constexpr const char* kFormatVersion = "1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t parse_size(const std::string& text, const std::string& field) {
  try {
    if (text.empty() || !std::isdigit(static_cast<unsigned char>(text[0]))) throw std::invalid_argument(text);
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("checkpoint field '" + field + "' is not an unsigned integer: '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

std::string encode_shape(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.rank(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

Shape decode_shape(const std::string& text) {
  std::vector<std::size_t> dims;
  for (const auto& p : split(text, 'x')) dims.push_back(parse_size(p, "input_shape"));
  try {
    return Shape(std::move(dims));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint field 'input_shape' invalid: ") + e.what());
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_floats(std::vector<std::uint8_t>& out, const Tensor<float>& t) {
  for (float f : t.values()) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
}

}  // namespace

void Manifest::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos)
    throw ConfigError("invalid manifest key '" + key + "'");
  if (value.find('\n') != std::string::npos)
    throw ConfigError("manifest value for '" + key + "' contains a newline");
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

bool Manifest::has(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.first == key) return true;
  return false;
}

const std::string& Manifest::get(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.first == key) return e.second;
  throw FormatError("checkpoint manifest is missing field '" + key + "'");
}

std::string Manifest::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

Manifest Manifest::parse(const std::string& text) {
  Manifest m;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError("checkpoint manifest line is not key=value: '" + line + "'");
    const std::string key = line.substr(0, eq);
    if (m.has(key)) throw FormatError("checkpoint manifest repeats field '" + key + "'");
    m.entries_.emplace_back(key, line.substr(eq + 1));
  }
  return m;
}

std::string encode_layers(const std::vector<LayerSpec>& specs) {
  std::string out;
  for (const auto& s : specs) {
    if (!out.empty()) out += ',';
    out += to_string(s.kind);
    switch (s.kind) {
      case LayerKind::conv2d:
        out += ":" + std::to_string(s.out_channels) + ":" + std::to_string(s.kernel_h) + ":" +
               to_string(s.padding);
        break;
      case LayerKind::dense: out += ":" + std::to_string(s.out_units); break;
      case LayerKind::dropout: out += ":" + format_double(s.rate); break;
      default: break;
    }
  }
  return out;
}

std::vector<LayerSpec> decode_layers(const std::string& text) {
  std::vector<LayerSpec> specs;
  for (const auto& token : split(text, ',')) {
    const auto f = split(token, ':');
    if (f.empty()) throw FormatError("checkpoint field 'layers' has an empty entry");
    try {
      if (f[0] == "conv2d" && f.size() == 4) {
        if (f[3] != "same" && f[3] != "valid")
          throw FormatError("checkpoint field 'layers': bad padding '" + f[3] + "'");
        LayerSpec s = LayerSpec::conv2d(parse_size(f[1], "layers"),
                                        f[3] == "same" ? Padding::same : Padding::valid);
        s.kernel_h = s.kernel_w = parse_size(f[2], "layers");
        if (s.kernel_h % 2 == 0 || s.kernel_h == 0)
          throw FormatError("checkpoint field 'layers': kernel must be odd, got " + f[2]);
        specs.push_back(s);
      } else if (f[0] == "maxpool2d" && f.size() == 1) {
        specs.push_back(LayerSpec::maxpool2d());
      } else if (f[0] == "flatten" && f.size() == 1) {
        specs.push_back(LayerSpec::flatten());
      } else if (f[0] == "relu" && f.size() == 1) {
        specs.push_back(LayerSpec::relu());
      } else if (f[0] == "dense" && f.size() == 2) {
        specs.push_back(LayerSpec::dense(parse_size(f[1], "layers")));
      } else if (f[0] == "dropout" && f.size() == 2) {
        specs.push_back(LayerSpec::dropout(std::stod(f[1])));
      } else {
        throw FormatError("checkpoint field 'layers': unrecognized entry '" + token + "'");
      }
    } catch (const ConfigError& e) {
      throw FormatError(std::string("checkpoint field 'layers': ") + e.what());
    } catch (const std::invalid_argument&) {
      throw FormatError("checkpoint field 'layers': bad number in '" + token + "'");
    }
  }
  return specs;
}

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const Manifest& extra) {
  Manifest m;
  m.set("format_version", kFormatVersion);
  m.set("input_shape", encode_shape(model.input_shape()));
  m.set("layers", encode_layers(model.specs()));
  m.set("seed", std::to_string(model.seed()));
  m.set("param_count", std::to_string(model.param_count()));
  for (const auto& [k, v] : extra.entries()) m.set(k, v);
  const std::string text = m.serialize();

  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.reserve(out.size() + 4 * model.param_count());
  for (const auto& l : model.layers()) {
    if (l.params.empty()) continue;
    put_floats(out, l.params.weights);
    put_floats(out, l.params.bias);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagicLen + 4)
    throw FormatError("checkpoint truncated: " + std::to_string(bytes.size()) +
                      " bytes is shorter than the header");
  if (std::memcmp(bytes.data(), kCheckpointMagic, kMagicLen) != 0)
    throw FormatError("checkpoint field 'magic' is not TGAGE1");
  const std::size_t mlen = get_u32(bytes.data() + kMagicLen);
  const std::size_t body = kMagicLen + 4 + mlen;
  if (body > bytes.size())
    throw FormatError("checkpoint truncated inside the manifest (declares " + std::to_string(mlen) +
                      " bytes)");
  Manifest m = Manifest::parse(std::string(bytes.begin() + kMagicLen + 4, bytes.begin() + body));
  if (m.get("format_version") != kFormatVersion)
    throw FormatError("checkpoint field 'format_version' is " + m.get("format_version") +
                      ", expected " + kFormatVersion);

  const Shape input = decode_shape(m.get("input_shape"));
  const std::vector<LayerSpec> specs = decode_layers(m.get("layers"));
  const std::size_t seed = parse_size(m.get("seed"), "seed");
  const std::size_t declared = parse_size(m.get("param_count"), "param_count");
  Model model = [&] {
    try {
      return Model(input, specs, seed);
    } catch (const Error& e) {
      throw FormatError(std::string("checkpoint field 'layers' inconsistent with input_shape: ") +
                        e.what());
    }
  }();
  if (declared != model.param_count())
    throw FormatError("checkpoint field 'param_count' is " + std::to_string(declared) +
                      " but the architecture has " + std::to_string(model.param_count()));
  const std::size_t payload = bytes.size() - body;
  if (payload != 4 * declared)
    throw FormatError("checkpoint field 'param_count' (" + std::to_string(declared) +
                      " floats) does not match parameter payload of " + std::to_string(payload) +
                      " bytes");

  const std::uint8_t* p = bytes.data() + body;
  auto read = [&p](Tensor<float>& t) {
    for (std::size_t i = 0; i < t.size(); ++i, p += 4) {
      const std::uint32_t bits = get_u32(p);
      std::memcpy(&t[i], &bits, sizeof bits);
    }
  };
  for (auto& l : model.layers()) {
    if (l.params.empty()) continue;
    read(l.params.weights);
    read(l.params.bias);
  }
  return Checkpoint{std::move(model), std::move(m)};
}

void save_checkpoint(const Model& model, const std::string& path, const Manifest& extra) {
  const auto bytes = encode_checkpoint(model, extra);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open checkpoint for writing: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tongueage
