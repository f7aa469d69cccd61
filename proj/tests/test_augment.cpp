#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "augment_oracles.hpp"
#include "tongueage/errors.hpp"

using namespace tongueage;
using namespace augment_oracle;

namespace {

TensorF speckled_frame(std::uint64_t seed) {
  Rng rng(seed);
  return render_synthetic_frame(8.0, rng);
}

bool in_unit_range(const TensorF& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

}  // namespace

TEST_CASE("zero rotation and zero noise are exact identities") {
  const TensorF f = speckled_frame(1);
  CHECK(rotate(f, 0.0) == f);
  Rng rng(2);
  CHECK(random_augment(f, AugmentConfig::noise(0.0), rng) == f);
  CHECK(random_augment(f, AugmentConfig::none(), rng) == f);
  CHECK(random_augment(f, AugmentConfig::rotation(0.0), rng) == f);
}

TEST_CASE("rotation inverse pair on the interior") {
  for (double angle : {1.0, 2.5, 5.0, -4.0}) {
    const auto d = inverse_pair_deviation(clean_frame(7.0), angle);
    CHECK(d.max_abs < 0.05);
    CHECK(d.interior > 20000);
  }
}

TEST_CASE("rotation direction is counter-clockwise on screen") {
  TensorF f(Shape{63, 412, 1});
  const std::size_t cy = 31, xr = 305;  // center column 205.5
  f.at(cy, xr, 0) = 1.0f;
  const TensorF r = rotate(f, 10.0);
  std::size_t by = 0, bx = 0;
  for (std::size_t y = 0; y < 63; ++y)
    for (std::size_t x = 0; x < 412; ++x)
      if (r.at(y, x, 0) > r.at(by, bx, 0)) by = y, bx = x;
  CHECK(by < cy);
  CHECK(std::abs(static_cast<double>(by) - (31.0 - 99.5 * std::sin(10.0 * M_PI / 180.0))) <= 1.0);
}

TEST_CASE("rotation keeps constants and fills outside with zero") {
  const TensorF ones(Shape{63, 412, 1}, 1.0f);
  const TensorF r = rotate(ones, 5.0);
  CHECK(r.at(31, 205, 0) == doctest::Approx(1.0f));
  CHECK(r.at(0, 0, 0) == 0.0f);
  CHECK(r.at(62, 411, 0) == 0.0f);
  CHECK_THROWS_AS(rotate(TensorF(Shape{4, 4, 2}), 1.0), ShapeError);
}

TEST_CASE("gaussian noise statistics") {
  const TensorF half(Shape{1000, 1000, 1}, 0.5f);
  Rng rng(11);
  const TensorF out = random_augment(half, AugmentConfig::noise(0.1), rng);
  const double sd = noise_std(half, out);
  CHECK(sd > 0.097);
  CHECK(sd < 0.103);
  double mean = 0;
  for (float v : out.values()) mean += v;
  CHECK(in_unit_range(out));
  CHECK(std::abs(mean / out.size() - 0.5) < 1e-3);
}

TEST_CASE("noise is clamped to the pixel range") {
  const TensorF f(Shape{63, 412, 1}, 0.98f);
  Rng rng(1);
  const TensorF out = random_augment(f, AugmentConfig::noise(0.5), rng);
  CHECK(in_unit_range(out));
  CHECK(out != f);
}

TEST_CASE("augmentation is seed deterministic") {
  const TensorF f = speckled_frame(4);
  for (const auto& cfg : {AugmentConfig::rotation(5), AugmentConfig::noise(0.05)}) {
    Rng a(9), b(9), c(10);
    const TensorF x = random_augment(f, cfg, a);
    CHECK(x == random_augment(f, cfg, b));
    CHECK(x != random_augment(f, cfg, c));
  }
}

TEST_CASE("config labels") {
  CHECK(AugmentConfig::rotation(5).label() == "rotation:5");
  CHECK(AugmentConfig::noise(0.1).label() == "gaussian_noise:0.1");
  CHECK(AugmentConfig::parse("rotation:2.5") == AugmentConfig::rotation(2.5));
  CHECK(AugmentConfig::parse("none") == AugmentConfig::none());
  CHECK(AugmentConfig::parse("noise:0.2").sigma == 0.2);
  CHECK_THROWS_AS(AugmentConfig::parse("rotation"), ConfigError);
  CHECK_THROWS_AS(AugmentConfig::parse("rotation:-1"), ConfigError);
  CHECK_THROWS_AS(AugmentConfig::parse("flip:1"), ConfigError);
  CHECK_THROWS_AS(AugmentConfig::parse("rotation:abc"), ConfigError);
}
