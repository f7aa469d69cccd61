#include "tongueage/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>

#include "tongueage/errors.hpp"
#include "tongueage/rng.hpp"

namespace tongueage {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (value.empty() || !std::isdigit(static_cast<unsigned char>(value[0]))) throw std::invalid_argument(value);
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size())
    throw FormatError("parameter file: " + key + " is not an integer: '" + value + "'");
  return static_cast<std::size_t>(v);
}

std::size_t checked_frame_count(std::size_t bytes, const ParamFile& params) {
  if (params.num_vectors() != kScanlines || params.pix_per_vector() != kEchoReturns)
    throw UnsupportedGeometryError("unsupported geometry NumVectors=" +
                                   std::to_string(params.num_vectors()) + " PixPerVector=" +
                                   std::to_string(params.pix_per_vector()) + " (expected 63 x 412)");
  const std::size_t per_frame = params.num_vectors() * params.pix_per_vector();
  if (bytes % per_frame != 0)
    throw FormatError("raw recording of " + std::to_string(bytes) + " bytes is not a whole number of " +
                      std::to_string(per_frame) + "-byte frames (remainder " +
                      std::to_string(bytes % per_frame) + ")");
  return bytes / per_frame;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == '"') throw ParseError("manifest: quoted CSV fields are not supported: " + line);
    if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

std::size_t train_count(double fraction, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

template <typename V>
void shuffle(std::vector<V>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::string to_string(Cohort cohort) { return cohort == Cohort::typical ? "typical" : "ssd"; }

Cohort parse_cohort(const std::string& text) {
  if (text == "typical") return Cohort::typical;
  if (text == "ssd") return Cohort::ssd;
  throw ParseError("unknown cohort '" + text + "' (expected typical or ssd)");
}

ParamFile::ParamFile(std::size_t num_vectors, std::size_t pix_per_vector,
                     std::optional<double> frames_per_sec)
    : num_vectors_(num_vectors), pix_per_vector_(pix_per_vector), frames_per_sec_(frames_per_sec) {
  entries_.emplace_back("NumVectors", std::to_string(num_vectors));
  entries_.emplace_back("PixPerVector", std::to_string(pix_per_vector));
  if (frames_per_sec) {
    std::ostringstream os;
    os << *frames_per_sec;
    entries_.emplace_back("FramesPerSec", os.str());
  }
}

ParamFile ParamFile::parse(const std::string& text) {
  ParamFile p;
  std::istringstream is(text);
  std::string line;
  bool have_vectors = false, have_pix = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("parameter file line is not Key=Value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    p.entries_.emplace_back(key, value);
    if (key == "NumVectors") {
      p.num_vectors_ = parse_count(key, value);
      have_vectors = true;
    } else if (key == "PixPerVector") {
      p.pix_per_vector_ = parse_count(key, value);
      have_pix = true;
    } else if (key == "FramesPerSec") {
      try {
        p.frames_per_sec_ = std::stod(value);
      } catch (const std::exception&) {
        throw FormatError("parameter file: FramesPerSec is not a number: '" + value + "'");
      }
    }
  }
  if (!have_vectors) throw FormatError("parameter file is missing NumVectors");
  if (!have_pix) throw FormatError("parameter file is missing PixPerVector");
  return p;
}

ParamFile ParamFile::load(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return parse(std::string(bytes.begin(), bytes.end()));
}

std::string ParamFile::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

Recording load_recording(std::span<const std::uint8_t> raw, const ParamFile& params) {
  const std::size_t frames = checked_frame_count(raw.size(), params);
  Recording rec;
  rec.frames.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    TensorF t(Shape{kScanlines, kEchoReturns, 1});
    const std::uint8_t* src = raw.data() + f * kFrameBytes;
    for (std::size_t i = 0; i < kFrameBytes; ++i) t[i] = static_cast<float>(src[i]) / 255.0f;
    rec.frames.push_back(std::move(t));
  }
  return rec;
}

std::vector<std::uint8_t> encode_recording(const Recording& rec) {
  std::vector<std::uint8_t> out;
  out.reserve(rec.frames.size() * kFrameBytes);
  for (const auto& f : rec.frames) {
    if (f.shape() != Shape{kScanlines, kEchoReturns, 1})
      throw ShapeError("recording frame has shape " + f.shape().str() + ", expected (63, 412, 1)");
    for (float p : f.values())
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(p, 0.0f, 1.0f) * 255.0f)));
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open file: " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open file for writing: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("failed writing file: " + path);
}

double parse_age(const std::string& label) {
  static const std::regex pattern(R"(^\s*(\d{1,3})y\s+(\d{1,2})m\s*$)");
  std::smatch m;
  if (!std::regex_match(label, m, pattern))
    throw ParseError("age label '" + label + "' does not match '<years>y <months>m'");
  const int years = std::stoi(m[1].str());
  const int months = std::stoi(m[2].str());
  if (months >= 12) throw ParseError("age label '" + label + "' has months >= 12");
  return years + months / 12.0;
}

std::string format_age(double years) {
  const long months = std::lround(years * 12.0);
  return std::to_string(months / 12) + "y " + std::to_string(months % 12) + "m";
}

void validate_age(double years) {
  if (!(years >= kMinAgeYears && years <= kMaxAgeYears))
    throw ConfigError("age " + std::to_string(years) + " years is outside the accepted 4-16 range");
}

std::vector<std::size_t> sample_indices(std::size_t frame_count, std::size_t stride) {
  if (stride < 1) throw ConfigError("frame stride must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < frame_count; i += stride) idx.push_back(i);
  return idx;
}

std::vector<TensorF> sample_frames(const Recording& rec, std::size_t stride) {
  std::vector<TensorF> out;
  for (auto i : sample_indices(rec.frames.size(), stride)) out.push_back(rec.frames[i]);
  return out;
}

TensorF Sample::frame() const {
  TensorF t(Shape{kScanlines, kEchoReturns, 1});
  for (std::size_t i = 0; i < kFrameBytes; ++i) t[i] = static_cast<float>(pixels[i]) / 255.0f;
  return t;
}

Sample Sample::from_frame(const TensorF& frame, double age_years, std::string speaker_id) {
  Recording r;
  r.frames.push_back(frame);
  return Sample{encode_recording(r), age_years, std::move(speaker_id)};
}

std::string to_string(SplitMode mode) { return mode == SplitMode::frame ? "frame" : "speaker"; }

SplitMode parse_split_mode(const std::string& text) {
  if (text == "frame") return SplitMode::frame;
  if (text == "speaker") return SplitMode::speaker;
  throw ConfigError("unknown split mode '" + text + "' (expected frame or speaker)");
}

std::vector<std::size_t> Dataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) out.push_back(i);
  return out;
}

std::vector<double> Dataset::ages(Split which) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) out.push_back(samples[i].age_years);
  return out;
}

std::vector<Sample> recording_samples(const Recording& rec, std::size_t stride) {
  std::vector<Sample> out;
  for (auto i : sample_indices(rec.frames.size(), stride))
    out.push_back(Sample::from_frame(rec.frames[i], rec.age_years, rec.speaker_id));
  return out;
}

Dataset split_dataset(std::vector<Sample> samples, double train_fraction, std::uint64_t seed,
                      SplitMode mode) {
  if (samples.size() < 2) throw ConfigError("splitting needs at least 2 samples");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  Rng rng(seed);
  Dataset ds;
  ds.split.assign(samples.size(), Split::val);
  if (mode == SplitMode::frame) {
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    const std::size_t n_train = train_count(train_fraction, samples.size());
    for (std::size_t k = 0; k < n_train; ++k) ds.split[order[k]] = Split::train;
  } else {
    std::vector<std::string> speakers;
    std::set<std::string> seen;
    for (const auto& s : samples)
      if (seen.insert(s.speaker_id).second) speakers.push_back(s.speaker_id);
    if (speakers.size() < 2) throw ConfigError("speaker split needs at least 2 speakers");
    shuffle(speakers, rng);
    const std::set<std::string> train(speakers.begin(),
                                      speakers.begin() + train_count(train_fraction, speakers.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (train.count(samples[i].speaker_id)) ds.split[i] = Split::train;
  }
  ds.samples = std::move(samples);
  return ds;
}

double mean_age_baseline(std::span<const double> train_ages, std::span<const double> val_ages) {
  if (train_ages.empty() || val_ages.empty())
    throw ConfigError("mean-age baseline needs non-empty train and validation splits");
  double mean = 0.0;
  for (double a : train_ages) mean += a;
  mean /= static_cast<double>(train_ages.size());
  double sum = 0.0;
  for (double a : val_ages) sum += (a - mean) * (a - mean);
  return sum / static_cast<double>(val_ages.size());
}

double mean_age_baseline(const Dataset& dataset) {
  const auto train = dataset.ages(Split::train);
  const auto val = dataset.ages(Split::val);
  return mean_age_baseline(train, val);
}

std::vector<ManifestRow> parse_manifest(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<ManifestRow> rows;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      if (line != kManifestHeader)
        throw ParseError("manifest header must be '" + std::string(kManifestHeader) + "'");
      header = false;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 6)
      throw ParseError("manifest line " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " columns, expected 6");
    ManifestRow r{cells[0], cells[1], parse_cohort(cells[2]), cells[3], cells[4], cells[5]};
    rows.push_back(std::move(r));
  }
  if (header) throw ParseError("manifest is empty");
  return rows;
}

std::string serialize_manifest(const std::vector<ManifestRow>& rows) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : rows)
    out += r.speaker_id + "," + r.session_id + "," + to_string(r.cohort) + "," + r.age_label + "," +
           r.raw_path + "," + r.param_path + "\n";
  return out;
}

Recording load_recording_file(const std::string& raw_path, const std::string& param_path) {
  const ParamFile params = ParamFile::load(param_path);
  const auto raw = read_file_bytes(raw_path);
  try {
    return load_recording(raw, params);
  } catch (const FormatError& e) {
    throw FormatError(raw_path + ": " + e.what());
  }
}

std::vector<Sample> load_samples(const std::string& dir, std::size_t stride) {
  const fs::path root(dir);
  const auto text = read_file_bytes((root / "manifest.csv").string());
  const auto rows = parse_manifest(std::string(text.begin(), text.end()));
  auto resolve = [&root](const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : root / path).string();
  };
  std::vector<Sample> out;
  for (const auto& r : rows) {
    const double age = parse_age(r.age_label);
    try {
      validate_age(age);
    } catch (const ConfigError& e) {
      throw FormatError("speaker " + r.speaker_id + ": " + e.what());
    }
    const std::string raw_path = resolve(r.raw_path);
    const ParamFile params = ParamFile::load(resolve(r.param_path));
    const auto raw = read_file_bytes(raw_path);
    std::size_t frames = 0;
    try {
      frames = checked_frame_count(raw.size(), params);
    } catch (const FormatError& e) {
      throw FormatError(raw_path + ": " + e.what());
    }
    for (auto i : sample_indices(frames, stride)) {
      const auto* begin = raw.data() + i * kFrameBytes;
      out.push_back(Sample{std::vector<std::uint8_t>(begin, begin + kFrameBytes), age, r.speaker_id});
    }
  }
  return out;
}

void write_data_dir(const std::string& dir, const std::vector<Recording>& recordings) {
  fs::create_directories(dir);
  std::vector<ManifestRow> rows;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const auto& rec = recordings[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "rec%04zu", i);
    const std::string raw = std::string(stem) + ".raw";
    const std::string param = std::string(stem) + ".param";
    write_file_bytes((fs::path(dir) / raw).string(), encode_recording(rec));
    const std::string ptext = ParamFile(kScanlines, kEchoReturns, 121.5).serialize();
    write_file_bytes((fs::path(dir) / param).string(),
                     std::span(reinterpret_cast<const std::uint8_t*>(ptext.data()), ptext.size()));
    rows.push_back({rec.speaker_id, rec.session_id, rec.cohort, format_age(rec.age_years), raw, param});
  }
  const std::string m = serialize_manifest(rows);
  write_file_bytes((fs::path(dir) / "manifest.csv").string(),
                   std::span(reinterpret_cast<const std::uint8_t*>(m.data()), m.size()));
}

}  // namespace tongueage
