#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tiny_model.hpp"
#include "tongueage/errors.hpp"
#include "tongueage/optim.hpp"

using namespace tongueage;

TEST_CASE("mse and mae on a known pair") {
  const TensorD p(Shape{2, 1}, {3.0, 1.0}), t(Shape{2, 1}, {1.0, 1.0});
  const auto r = mse_loss(p, t);
  CHECK(r.loss == 2.0);
  CHECK(r.grad[0] == 2.0);
  CHECK(r.grad[1] == 0.0);
  CHECK(mae(p, t) == 1.0);
  CHECK(mse_loss(t, t).loss == 0.0);
}

TEST_CASE("mse gradient matches finite differences") {
  std::mt19937_64 gen(3);
  for (int draw = 0; draw < 20; ++draw) {
    const TensorD t = oracle::random_tensor(Shape{6, 1}, gen, -3, 3);
    const TensorD p = oracle::random_tensor(Shape{6, 1}, gen, -3, 3);
    const TensorD num = oracle::numeric_gradient([&](const TensorD& q) { return mse_loss(q, t).loss; }, p);
    CHECK(oracle::relative_error(mse_loss(p, t).grad, num) < 1e-9);
  }
}

TEST_CASE("mse rejects mismatched shapes") {
  CHECK_THROWS_AS(mse_loss(TensorD(Shape{2, 1}), TensorD(Shape{3, 1})), ShapeError);
}

TEST_CASE("rmsprop single step") {
  std::vector<double> theta{1.0}, g{1.0}, v{0.0};
  rmsprop_update<double>(theta, g, v, {});
  CHECK(v[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(theta[0] - (1.0 - 0.001 / (std::sqrt(0.1) + 1e-7))) < 1e-12);
  CHECK(std::abs((theta[0] - 1.0) + 0.0031622766) < 1e-9);
}

TEST_CASE("rmsprop two steps follow the scalar recurrence") {
  std::vector<double> theta{0.5}, v{0.0};
  const double g1 = 0.3, g2 = -0.7;
  std::vector<double> g{g1};
  rmsprop_update<double>(theta, g, v, {});
  g[0] = g2;
  rmsprop_update<double>(theta, g, v, {});
  const double v1 = 0.1 * g1 * g1;
  const double t1 = 0.5 - 0.001 * g1 / (std::sqrt(v1) + 1e-7);
  const double v2 = 0.9 * v1 + 0.1 * g2 * g2;
  const double t2 = t1 - 0.001 * g2 / (std::sqrt(v2) + 1e-7);
  CHECK(std::abs(v[0] - v2) < 1e-12);
  CHECK(std::abs(theta[0] - t2) < 1e-12);
}

TEST_CASE("rmsprop with zero gradient leaves parameters alone") {
  std::vector<double> theta{2.0, -1.0}, g{0.0, 0.0}, v{0.5, 0.0};
  rmsprop_update<double>(theta, g, v, {});
  CHECK(theta[0] == 2.0);
  CHECK(theta[1] == -1.0);
  CHECK(v[0] == doctest::Approx(0.45));
}

TEST_CASE("rmsprop moves against the gradient sign") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> theta{d(gen)}, g{d(gen)}, v{std::abs(d(gen))};
    if (g[0] == 0.0) continue;
    const double before = theta[0];
    rmsprop_update<double>(theta, g, v, {});
    CHECK((theta[0] - before) * g[0] < 0);
  }
}

TEST_CASE("rmsprop state steps a network and keeps its shape") {
  auto net = tiny::build(2);
  std::mt19937_64 gen(2);
  const TensorD x = oracle::random_tensor(Shape{4, 8, 8, 1}, gen, 0, 1);
  const TensorD t = oracle::random_tensor(Shape{4, 1}, gen, 1, 2);
  RmsPropState<double> opt(net);
  const std::size_t count = net.param_count();
  const auto before = parameter_digest(net);
  double first = 0, last = 0;
  for (int step = 0; step < 40; ++step) {
    Rng rng(step);
    const auto res = backward(net, x, t, rng);
    if (step == 0) first = res.loss;
    last = res.loss;
    opt.step(net, res.gradients);
  }
  CHECK(parameter_digest(net) != before);
  CHECK(net.param_count() == count);
  CHECK(last < first);
  CHECK(opt.accumulators().size() == net.layers().size());
}
