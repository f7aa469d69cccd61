#ifndef TONGUEAGE_CHECKPOINT_HPP
#define TONGUEAGE_CHECKPOINT_HPP

// Checkpoint layout:
//   "TGAGE1"                       6 bytes magic
//   uint32 LE                      manifest length in bytes
//   manifest                       UTF-8 "key=value\n" lines
//   parameter buffers              per parameterized layer in layer order,
//                                  weights then bias, float32 LE
//
// The manifest always carries format_version, input_shape, layers, seed and
// param_count; callers may add keys (epoch, config digest, optimizer).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tongueage/model.hpp"

namespace tongueage {

inline constexpr char kCheckpointMagic[] = "TGAGE1";

/// Ordered key=value list; keys are unique.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  /// FormatError naming the key when absent.
  const std::string& get(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string serialize() const;
  static Manifest parse(const std::string& text);

  friend bool operator==(const Manifest&, const Manifest&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct Checkpoint {
  Model model;
  Manifest manifest;
};

std::string encode_layers(const std::vector<LayerSpec>& specs);
std::vector<LayerSpec> decode_layers(const std::string& text);

/// `extra` entries are appended after the architecture keys.
std::vector<std::uint8_t> encode_checkpoint(const Model& model, const Manifest& extra = {});
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Model& model, const std::string& path, const Manifest& extra = {});
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tongueage

#endif  // TONGUEAGE_CHECKPOINT_HPP
