#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "tongueage/config.hpp"
#include "tongueage/errors.hpp"

using namespace tongueage;

TEST_CASE("describe round trips every field") {
  TrainConfig c;
  c.epochs = 7;
  c.batch_size = 3;
  c.learning_rate = 1.0 / 3.0;
  c.dropout_rate = 0.25;
  c.augment = AugmentConfig::noise(0.1);
  c.seed = 18446744073709551615ull;
  c.precision = Precision::float64;
  c.epsilon = 1e-8;
  c.frame_stride = 10;
  c.train_fraction = 0.7;
  c.split_mode = SplitMode::speaker;
  c.chunk_size = 4;
  const TrainConfig back = parse_train_config(describe(c));
  CHECK(describe(back) == describe(c));
  CHECK(back.learning_rate == c.learning_rate);
  CHECK(back.seed == c.seed);
  CHECK(back.augment == c.augment);
  CHECK(config_entries(c).size() == train_config_keys().size());
  for (std::size_t i = 0; i < train_config_keys().size(); ++i)
    CHECK(config_entries(c)[i].first == train_config_keys()[i]);
}

TEST_CASE("file parsing with comments and overrides") {
  const TrainConfig c = parse_train_config("# run\nepochs = 12\n\nbatch-size=4  # small\naugment=none\n");
  CHECK(c.epochs == 12);
  CHECK(c.batch_size == 4);
  CHECK(c.augment.mode == AugmentMode::none);
  CHECK(c.learning_rate == 0.001);

  TrainConfig base;
  base.seed = 5;
  CHECK(parse_train_config("epochs=1", base).seed == 5);

  const auto path = (std::filesystem::temp_directory_path() / "tongueage_cfg.txt").string();
  std::ofstream(path) << "seed=9\nlearning_rate=0.01\n";
  const TrainConfig f = load_train_config(path);
  CHECK(f.seed == 9);
  CHECK(f.learning_rate == 0.01);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_train_config("/nonexistent/cfg"), ConfigError);
}

TEST_CASE("bad values are config errors") {
  TrainConfig c;
  CHECK_THROWS_AS(apply_config_value(c, "epochs", "-3"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "epochs", " -3"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "epochs", "3x"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "learning_rate", "fast"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "momentum", "0.9"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "precision", "half"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "split_mode", "random"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("epochs 3"), ConfigError);
}

TEST_CASE("digest tracks content") {
  TrainConfig a, b;
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  b.seed = 1;
  CHECK(config_digest(a) != config_digest(b));
}
