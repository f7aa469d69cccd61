#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "tongueage/dataio.hpp"
#include "tongueage/errors.hpp"
#include "tongueage/synth.hpp"

using namespace tongueage;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> ramp_bytes(std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>(i * 7 % 256);
  return v;
}

std::vector<Sample> labelled(std::size_t n) {
  std::vector<Sample> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i].age_years = 4.0 + static_cast<double>(i % 97) / 8.0;
    s[i].speaker_id = "spk" + std::to_string(i % 13);
  }
  return s;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tongueage_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("raw decode") {
  const auto raw = ramp_bytes(3 * kFrameBytes);
  const Recording r = load_recording(raw, ParamFile{});
  REQUIRE(r.frames.size() == 3);
  CHECK(r.frames[0].shape() == Shape{63, 412, 1});
  CHECK(r.frames[1].at(0, 0, 0) == raw[kFrameBytes] / 255.0f);
  CHECK(r.frames[2].at(62, 411, 0) == raw.back() / 255.0f);
  CHECK(r.frames[0].at(1, 0, 0) == raw[412] / 255.0f);
  CHECK(encode_recording(r) == raw);
}

TEST_CASE("raw decode rejects bad sizes and geometry") {
  const auto raw = ramp_bytes(kFrameBytes + 1);
  try {
    load_recording(raw, ParamFile{});
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("remainder 1") != std::string::npos);
  }
  CHECK_THROWS_AS(load_recording(ramp_bytes(kFrameBytes), ParamFile(64, 412)), UnsupportedGeometryError);
  CHECK_THROWS_AS(load_recording(ramp_bytes(kFrameBytes), ParamFile(63, 400)), UnsupportedGeometryError);
  CHECK(load_recording(ramp_bytes(0), ParamFile{}).frames.empty());
}

TEST_CASE("param file") {
  const ParamFile p = ParamFile::parse("NumVectors=63\nPixPerVector=412\nFramesPerSec=121.5\nAngle=0.02\n");
  CHECK(p.num_vectors() == 63);
  CHECK(p.pix_per_vector() == 412);
  CHECK(p.frames_per_sec().value() == 121.5);
  CHECK(p.entries().size() == 4);
  CHECK(ParamFile::parse(p.serialize()).entries() == p.entries());
  CHECK_THROWS_AS(ParamFile::parse("NumVectors=63\n"), FormatError);
  CHECK_THROWS_AS(ParamFile::parse("NumVectors=-63\nPixPerVector=412\n"), FormatError);
}

TEST_CASE("age labels") {
  CHECK(parse_age("8y 4m") == 8.0 + 4.0 / 12.0);
  CHECK(parse_age("5y 0m") == 5.0);
  CHECK(parse_age("13y 4m") == 13.0 + 4.0 / 12.0);
  CHECK(parse_age("10y 11m") == 10.0 + 11.0 / 12.0);
  CHECK_THROWS_AS(parse_age("8y 12m"), ParseError);
  CHECK_THROWS_AS(parse_age("8 years"), ParseError);
  CHECK_THROWS_AS(parse_age(""), ParseError);
  CHECK(format_age(parse_age("7y 3m")) == "7y 3m");
  CHECK_NOTHROW(validate_age(4.0));
  CHECK_NOTHROW(validate_age(16.0));
  CHECK_THROWS_AS(validate_age(3.9), ConfigError);
  CHECK_THROWS_AS(validate_age(16.1), ConfigError);
}

TEST_CASE("frame sampling") {
  CHECK(sample_indices(450, 150) == std::vector<std::size_t>{0, 150, 300});
  CHECK(sample_indices(149, 150) == std::vector<std::size_t>{0});
  CHECK(sample_indices(0, 150).empty());
  CHECK(sample_indices(5, 1).size() == 5);
  CHECK_THROWS_AS(sample_indices(10, 0), ConfigError);

  Recording r;
  r.age_years = 9.5;
  r.speaker_id = "a";
  for (int i = 0; i < 450; ++i) r.frames.emplace_back(Shape{63, 412, 1}, static_cast<float>(i) / 450.0f);
  const auto frames = sample_frames(r, 150);
  REQUIRE(frames.size() == 3);
  CHECK(frames[1] == r.frames[150]);
  const auto samples = recording_samples(r, 150);
  CHECK(samples.size() == 3);
  CHECK(samples[2].age_years == 9.5);
  CHECK(samples[2].pixels.size() == kFrameBytes);
}

TEST_CASE("split sizes and partition") {
  const Dataset ten = split_dataset(labelled(10), 0.8, 1);
  CHECK(ten.indices(Split::train).size() == 8);
  CHECK(ten.indices(Split::val).size() == 2);

  const Dataset big = split_dataset(labelled(24449), 0.8, 1);
  const auto tr = big.indices(Split::train), va = big.indices(Split::val);
  CHECK(tr.size() == 19560);
  CHECK(va.size() == 4889);
  std::vector<std::size_t> all(tr);
  all.insert(all.end(), va.begin(), va.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(24449);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(all == expect);
  CHECK(std::abs(static_cast<double>(tr.size()) - 0.8 * 24449) <= 1.0);

  CHECK_THROWS_AS(split_dataset(labelled(1), 0.8, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(labelled(10), 1.5, 1), ConfigError);
  const Dataset two = split_dataset(labelled(2), 0.99, 1);
  CHECK(two.indices(Split::val).size() == 1);
}

TEST_CASE("split is seed deterministic") {
  const Dataset a = split_dataset(labelled(500), 0.8, 7), b = split_dataset(labelled(500), 0.8, 7),
                c = split_dataset(labelled(500), 0.8, 8);
  CHECK(a.split == b.split);
  CHECK(a.split != c.split);
  CHECK(a.indices(Split::train).size() == c.indices(Split::train).size());
}

TEST_CASE("speaker split keeps speakers together") {
  const Dataset d = split_dataset(labelled(260), 0.8, 3, SplitMode::speaker);
  std::set<std::string> train, val;
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    (d.split[i] == Split::train ? train : val).insert(d.samples[i].speaker_id);
  for (const auto& s : train) CHECK(val.count(s) == 0);
  CHECK(!train.empty());
  CHECK(!val.empty());
}

TEST_CASE("mean age baseline") {
  const std::vector<double> tr{8, 10}, va{9, 11};
  CHECK(mean_age_baseline(tr, va) == 2.0);
  const std::vector<double> tr2{10, 8}, va2{11, 9};
  CHECK(mean_age_baseline(tr2, va2) == 2.0);
  const Dataset d = split_dataset(labelled(40), 0.8, 2);
  const auto a = d.ages(Split::train), b = d.ages(Split::val);
  CHECK(mean_age_baseline(d) == mean_age_baseline(a, b));
}

TEST_CASE("manifest csv") {
  const std::vector<ManifestRow> rows = {{"s01", "S1", Cohort::typical, "8y 4m", "a.raw", "a.param"},
                                         {"s02", "S2", Cohort::ssd, "12y 0m", "b.raw", "b.param"}};
  const std::string text = serialize_manifest(rows);
  CHECK(text.rfind(kManifestHeader, 0) == 0);
  const auto back = parse_manifest(text);
  REQUIRE(back.size() == 2);
  CHECK(back[1].cohort == Cohort::ssd);
  CHECK(back[0].age_label == "8y 4m");
  CHECK_THROWS_AS(parse_manifest("speaker_id,age\nx,1\n"), ParseError);
  CHECK_THROWS_AS(parse_manifest(std::string(kManifestHeader) + "\na,b,typical,8y 4m,x.raw\n"), ParseError);
}

TEST_CASE("synthetic data") {
  const auto a = synth_generate(6, 9), b = synth_generate(6, 9), c = synth_generate(6, 10);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frames == b[i].frames);
    CHECK(a[i].age_years == b[i].age_years);
    CHECK(a[i].age_years >= 5.0);
    CHECK(a[i].age_years <= 13.0);
    CHECK(a[i].frames.size() == 4);
    CHECK(format_age(a[i].age_years) == format_age(parse_age(format_age(a[i].age_years))));
  }
  CHECK(a[0].frames != c[0].frames);
  CHECK(arc_geometry(9.0).apex_row - arc_geometry(8.0).apex_row == doctest::Approx(2.5));
  CHECK(age_from_apex_row(arc_geometry(11.25).apex_row) == doctest::Approx(11.25));
}

TEST_CASE("synthetic apex tracks age") {
  SynthOptions opt;
  opt.speckle = 0.0;
  opt.articulation = false;
  for (double age : {5.0, 9.0, 13.0}) {
    Rng rng(1);
    const TensorF f = render_synthetic_frame(age, rng, opt);
    std::size_t best = 0;
    for (std::size_t y = 0; y < 63; ++y)
      if (f.at(y, 205, 0) > f.at(best, 205, 0)) best = y;
    CHECK(std::abs(static_cast<double>(best) - arc_geometry(age).apex_row) <= 1.0);
  }
}

TEST_CASE("data directory round trip") {
  const fs::path dir = scratch("dataio_dir");
  const auto recs = synth_generate(3, 4);
  write_data_dir(dir.string(), recs);
  CHECK(fs::exists(dir / "manifest.csv"));
  const auto samples = load_samples(dir.string(), 2);
  REQUIRE(samples.size() == 6);
  CHECK(samples[0].frame() == recs[0].frames[0]);
  CHECK(samples[3].frame() == recs[1].frames[2]);
  CHECK(samples[4].age_years == recs[2].age_years);
  CHECK(samples[4].speaker_id == recs[2].speaker_id);

  const auto raw = read_file_bytes((dir / "rec0000.raw").string());
  write_file_bytes((dir / "rec0000.raw").string(), std::span(raw).first(raw.size() - 3));
  CHECK_THROWS_AS(load_samples(dir.string(), 2), FormatError);
  fs::remove_all(dir);
}
