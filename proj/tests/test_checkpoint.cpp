#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "tongueage/checkpoint.hpp"
#include "tongueage/errors.hpp"

using namespace tongueage;

namespace {

Model small_model(std::uint64_t seed) {
  return Model(Shape{10, 12, 1},
               {LayerSpec::conv2d(2, Padding::same), LayerSpec::relu(), LayerSpec::maxpool2d(),
                LayerSpec::flatten(), LayerSpec::dense(3), LayerSpec::relu(), LayerSpec::dropout(0.25),
                LayerSpec::dense(1)},
               seed);
}

std::vector<std::uint8_t> rebuild(const std::vector<std::uint8_t>& bytes, const std::string& key,
                                  const std::string& value) {
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[6 + i]) << (8 * i);
  Manifest m = Manifest::parse(std::string(bytes.begin() + 10, bytes.begin() + 10 + len));
  m.set(key, value);
  const std::string text = m.serialize();
  std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 6);
  const auto n = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 10 + len, bytes.end());
  return out;
}

std::string error_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("round trip preserves parameters and predictions") {
  Model m = small_model(3);
  std::mt19937_64 gen(1);
  for (auto& l : m.layers())
    if (!l.params.empty())
      for (auto& b : l.params.bias.data()) b = static_cast<float>(std::uniform_real_distribution<>(-1, 1)(gen));
  Manifest extra;
  extra.set("epoch", "7");
  const auto bytes = encode_checkpoint(m, extra);
  const Checkpoint c = decode_checkpoint(bytes);
  CHECK(parameter_digest(c.model) == parameter_digest(m));
  CHECK(c.model.seed() == 3);
  CHECK(c.manifest.get("epoch") == "7");
  CHECK(c.manifest.get("param_count") == std::to_string(m.param_count()));
  CHECK(c.model.summary().size() == m.summary().size());
  TensorF x(Shape{2, 10, 12, 1});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(i % 17) / 17.0f;
  CHECK(predict(c.model, x) == predict(m, x));
  CHECK(encode_checkpoint(c.model, extra) == bytes);
}

TEST_CASE("full model file round trip") {
  const Model m = build_paper_model(11);
  const auto path = (std::filesystem::temp_directory_path() / "tongueage_ckpt_test.ckpt").string();
  save_checkpoint(m, path);
  const Checkpoint c = load_checkpoint(path);
  CHECK(parameter_digest(c.model) == parameter_digest(m));
  CHECK(c.manifest.get("input_shape") == "63x412x1");
  CHECK(std::filesystem::file_size(path) > 4 * m.param_count());
  std::filesystem::remove(path);
}

TEST_CASE("layer tokens round trip") {
  const auto specs = paper_layer_specs(0.3);
  const std::string text = encode_layers(specs);
  CHECK(text.find("conv2d:8:3:same") != std::string::npos);
  CHECK(encode_layers(decode_layers(text)) == text);
  CHECK_THROWS_AS(decode_layers("conv2d:8:3:mirror"), FormatError);
  CHECK_THROWS_AS(decode_layers("softmax"), FormatError);
}

TEST_CASE("corrupt checkpoints are rejected with the field named") {
  const auto good = encode_checkpoint(small_model(1));
  auto truncated = good;
  truncated.resize(good.size() - 5);
  CHECK(error_of(truncated).find("payload") != std::string::npos);
  CHECK(error_of({good.begin(), good.begin() + 8}).find("truncated") != std::string::npos);

  auto magic = good;
  magic[0] = 'X';
  CHECK(error_of(magic).find("magic") != std::string::npos);

  CHECK(error_of(rebuild(good, "param_count", "12")).find("param_count") != std::string::npos);
  CHECK(error_of(rebuild(good, "format_version", "9")).find("format_version") != std::string::npos);
  CHECK(error_of(rebuild(good, "layers", "flatten,dense:x")).find("layers") != std::string::npos);
  CHECK(error_of(rebuild(good, "seed", "-1")).find("seed") != std::string::npos);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt"), FormatError);
}

TEST_CASE("manifest parsing") {
  Manifest m;
  m.set("a", "1");
  m.set("b", "x=y");
  m.set("a", "2");
  CHECK(m.entries().size() == 2);
  CHECK(Manifest::parse(m.serialize()) == m);
  CHECK_THROWS_AS(Manifest::parse("novalue\n"), FormatError);
  CHECK_THROWS_AS(Manifest::parse("a=1\na=2\n"), FormatError);
  CHECK_THROWS_AS(m.get("zzz"), FormatError);
}
