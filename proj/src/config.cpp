#include "tongueage/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tongueage/errors.hpp"

namespace tongueage {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long r = 0;
  try {
    if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0]))) throw std::invalid_argument(v);
    r = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(r);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double r = 0;
  try {
    r = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return r;
}

}  // namespace

const std::vector<std::string>& train_config_keys() {
  static const std::vector<std::string> keys = {
      "epochs",    "batch_size", "learning_rate", "dropout_rate", "augment",        "max_degrees",
      "sigma",     "seed",       "precision",     "rho",          "epsilon",        "frame_stride",
      "train_fraction", "split_mode", "chunk_size"};
  return keys;
}

void apply_config_value(TrainConfig& c, const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(raw_value);
  if (key == "epochs") c.epochs = to_size(key, v);
  else if (key == "batch_size") c.batch_size = to_size(key, v);
  else if (key == "learning_rate") c.learning_rate = to_double(key, v);
  else if (key == "dropout_rate") c.dropout_rate = to_double(key, v);
  else if (key == "augment") c.augment.mode = parse_augment_mode(v);
  else if (key == "max_degrees") c.augment.max_degrees = to_double(key, v);
  else if (key == "sigma") c.augment.sigma = to_double(key, v);
  else if (key == "seed") c.seed = to_size(key, v);
  else if (key == "precision") c.precision = parse_precision(v);
  else if (key == "rho") c.rho = to_double(key, v);
  else if (key == "epsilon") c.epsilon = to_double(key, v);
  else if (key == "frame_stride") c.frame_stride = to_size(key, v);
  else if (key == "train_fraction") c.train_fraction = to_double(key, v);
  else if (key == "split_mode") c.split_mode = parse_split_mode(v);
  else if (key == "chunk_size") c.chunk_size = to_size(key, v);
  else throw ConfigError("unknown config key '" + raw_key + "'");
}

TrainConfig parse_train_config(const std::string& text, TrainConfig base) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
    apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

TrainConfig load_train_config(const std::string& path, TrainConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_train_config(ss.str(), base);
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& c) {
  return {{"epochs", std::to_string(c.epochs)},
          {"batch_size", std::to_string(c.batch_size)},
          {"learning_rate", num(c.learning_rate)},
          {"dropout_rate", num(c.dropout_rate)},
          {"augment", to_string(c.augment.mode)},
          {"max_degrees", num(c.augment.max_degrees)},
          {"sigma", num(c.augment.sigma)},
          {"seed", std::to_string(c.seed)},
          {"precision", to_string(c.precision)},
          {"rho", num(c.rho)},
          {"epsilon", num(c.epsilon)},
          {"frame_stride", std::to_string(c.frame_stride)},
          {"train_fraction", num(c.train_fraction)},
          {"split_mode", to_string(c.split_mode)},
          {"chunk_size", std::to_string(c.chunk_size)}};
}

std::string describe(const TrainConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + "=" + v + "\n";
  return out;
}

std::string config_digest(const TrainConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : describe(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tongueage
