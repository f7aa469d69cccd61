#ifndef TONGUEAGE_DATAIO_HPP
#define TONGUEAGE_DATAIO_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tongueage/tensor.hpp"

namespace tongueage {

inline constexpr std::size_t kScanlines = 63;
inline constexpr std::size_t kEchoReturns = 412;
inline constexpr std::size_t kFrameBytes = kScanlines * kEchoReturns;  // 25,956
inline constexpr double kMinAgeYears = 4.0;
inline constexpr double kMaxAgeYears = 16.0;

enum class Cohort { typical, ssd };

std::string to_string(Cohort cohort);
Cohort parse_cohort(const std::string& text);

/// Parameter sidecar of a raw recording: "Key=Value" lines.
class ParamFile {
 public:
  ParamFile() = default;
  ParamFile(std::size_t num_vectors, std::size_t pix_per_vector,
            std::optional<double> frames_per_sec = std::nullopt);

  static ParamFile parse(const std::string& text);
  static ParamFile load(const std::string& path);
  std::string serialize() const;

  std::size_t num_vectors() const { return num_vectors_; }
  std::size_t pix_per_vector() const { return pix_per_vector_; }
  std::optional<double> frames_per_sec() const { return frames_per_sec_; }
  /// All keys in file order, including unknown ones.
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::size_t num_vectors_ = kScanlines;
  std::size_t pix_per_vector_ = kEchoReturns;
  std::optional<double> frames_per_sec_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Decoded ultrasound sequence: frames are 63 x 412 x 1 with pixels b/255.
struct Recording {
  std::vector<TensorF> frames;
  std::string speaker_id;
  std::string session_id;
  double age_years = 0.0;
  Cohort cohort = Cohort::typical;
};

/// Raw layout: u8 samples, frame-major, scanline-major within a frame, no header.
Recording load_recording(std::span<const std::uint8_t> raw, const ParamFile& params);
/// Inverse of load_recording's pixel mapping: round(p * 255), clamped.
std::vector<std::uint8_t> encode_recording(const Recording& rec);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

/// "<years>y <months>m" -> years + months / 12.
double parse_age(const std::string& label);
/// Nearest whole month, in the same "<y>y <m>m" form.
std::string format_age(double years);
/// Throws ConfigError unless 4 <= age <= 16.
void validate_age(double years);

/// Indices 0, stride, 2 stride, ... below frame_count.
std::vector<std::size_t> sample_indices(std::size_t frame_count, std::size_t stride);
std::vector<TensorF> sample_frames(const Recording& rec, std::size_t stride);

/// One training example. Pixels stay in their 8-bit source form; frame()
/// produces the normalized 63 x 412 x 1 tensor.
struct Sample {
  std::vector<std::uint8_t> pixels;
  double age_years = 0.0;
  std::string speaker_id;

  TensorF frame() const;
  static Sample from_frame(const TensorF& frame, double age_years, std::string speaker_id);
};

enum class Split { train, val };
enum class SplitMode { frame, speaker };

std::string to_string(SplitMode mode);
SplitMode parse_split_mode(const std::string& text);

struct Dataset {
  std::vector<Sample> samples;
  std::vector<Split> split;  // one entry per sample

  std::vector<std::size_t> indices(Split which) const;
  std::vector<double> ages(Split which) const;
};

/// Frame-level samples of a recording after stride sampling.
std::vector<Sample> recording_samples(const Recording& rec, std::size_t stride);

/// Seeded Fisher-Yates shuffle; the first ceil(fraction * N) go to train.
/// Speaker mode shuffles speakers instead and keeps each speaker's frames
/// together.
Dataset split_dataset(std::vector<Sample> samples, double train_fraction, std::uint64_t seed,
                      SplitMode mode = SplitMode::frame);

/// MSE of predicting the mean training age for every validation sample.
double mean_age_baseline(std::span<const double> train_ages, std::span<const double> val_ages);
double mean_age_baseline(const Dataset& dataset);

/// One row of a data directory's manifest.csv.
struct ManifestRow {
  std::string speaker_id;
  std::string session_id;
  Cohort cohort = Cohort::typical;
  std::string age_label;
  std::string raw_path;    // relative to the manifest's directory unless absolute
  std::string param_path;
};

inline constexpr const char* kManifestHeader =
    "speaker_id,session_id,cohort,age_label,raw_path,param_path";

std::vector<ManifestRow> parse_manifest(const std::string& text);
std::string serialize_manifest(const std::vector<ManifestRow>& rows);

Recording load_recording_file(const std::string& raw_path, const std::string& param_path);

/// Reads <dir>/manifest.csv and returns the stride-sampled frames of every
/// recording it lists, in manifest order. Only sampled frames are kept.
std::vector<Sample> load_samples(const std::string& dir, std::size_t stride);
/// Writes raw + param files and manifest.csv for `recordings` into `dir`.
void write_data_dir(const std::string& dir, const std::vector<Recording>& recordings);

}  // namespace tongueage

#endif  // TONGUEAGE_DATAIO_HPP
