#include <doctest.h>

#include "jscc/attention.hpp"
#include "testutil.hpp"

using namespace jscc::attention;
using jscc::Graph;
using jscc::RngStream;
using jscc::Tensor;
namespace ops = jscc::ops;

namespace {

AFParams<double> random_params(int c, int m, RngStream& stream) {
  AFParams<double> p = AFParams<double>::zeros(c, m);
  for (int64_t i = 0; i < p.w1.numel(); ++i) p.w1[i] = stream.uniform(-0.5, 0.5);
  for (int64_t i = 0; i < p.b1.numel(); ++i) p.b1[i] = stream.uniform(-0.2, 0.2);
  for (int64_t i = 0; i < p.w2.numel(); ++i) p.w2[i] = stream.uniform(-0.5, 0.5);
  for (int64_t i = 0; i < p.b2.numel(); ++i) p.b2[i] = stream.uniform(-0.2, 0.2);
  return p;
}

}  // namespace

TEST_CASE("global_average_pool") {
  Tensor<double> f({2, 2, 1}, {1, 2, 3, 4});
  auto pooled = global_average_pool(f);
  REQUIRE(pooled.size() == 1);
  CHECK(pooled[0] == doctest::Approx(2.5));

  Tensor<double> constant = Tensor<double>::full({3, 5, 4}, 0.7);
  auto pc = global_average_pool(constant);
  for (double v : pc) CHECK(v == doctest::Approx(0.7));

  Tensor<double> tiny({1, 1, 3}, {9, 8, 7});
  auto pt = global_average_pool(tiny);
  CHECK(pt == std::vector<double>{9, 8, 7});
}

TEST_CASE("build_context puts the snr first") {
  auto ctx = build_context<double>({0.5, 0.7}, 10.0);
  CHECK(ctx == std::vector<double>{10.0, 0.5, 0.7});

  CHECK_THROWS_AS(build_context<double>({}, 1.0), std::invalid_argument);

  auto zero_snr = build_context<double>({1.0}, 0.0);
  CHECK(zero_snr == std::vector<double>{0.0, 1.0});
}

TEST_CASE("predict_factors") {
  SUBCASE("all-zero parameters produce 0.5 everywhere") {
    auto p = AFParams<double>::zeros(3, 3);
    auto s = predict_factors<double>({5.0, 0.1, 0.2, 0.3}, p);
    REQUIRE(s.size() == 3);
    for (double v : s) CHECK(v == 0.5);
  }

  SUBCASE("hand-evaluated single-unit network") {
    auto p = AFParams<double>::zeros(1, 1);
    p.w1.at(0, 0) = 0.0;  // mu weight
    p.w1.at(1, 0) = 1.0;  // pooled weight
    p.w2.at(0, 0) = 1.0;
    auto s = predict_factors<double>({5.0, 1.0}, p);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == doctest::Approx(0.7310586).epsilon(1e-6));
  }

  SUBCASE("factors always strictly inside (0,1)") {
    RngStream stream(7);
    for (int trial = 0; trial < 30; ++trial) {
      const int c = 1 + static_cast<int>(stream.next_u64() % 8);
      const int m = 1 + static_cast<int>(stream.next_u64() % 8);
      auto p = random_params(c, m, stream);
      std::vector<double> ctx(static_cast<size_t>(c + 1));
      for (auto& v : ctx) v = stream.uniform(-20, 20);
      auto s = predict_factors(ctx, p);
      for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    auto p = AFParams<double>::zeros(3, 2);
    CHECK_THROWS_AS(predict_factors<double>({1.0, 2.0}, p), std::invalid_argument);
  }
}

TEST_CASE("recalibrate") {
  Tensor<double> f = Tensor<double>::full({2, 2, 2}, 1.0);
  auto identity = recalibrate(f, {1.0, 1.0});
  for (int64_t i = 0; i < identity.numel(); ++i) CHECK(identity[i] == 1.0);

  auto halved = recalibrate(f, {0.25, 0.5});
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) {
      CHECK(halved.at(y, x, 0) == 0.25);
      CHECK(halved.at(y, x, 1) == 0.5);
    }
  }

  auto killed = recalibrate(f, {0.0, 1.0});
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) CHECK(killed.at(y, x, 0) == 0.0);
  }

  CHECK_THROWS_AS(recalibrate(f, {0.5}), std::invalid_argument);
}

TEST_CASE("af_forward with zero parameters halves the features exactly") {
  RngStream stream(13);
  Tensor<double> f = testutil::random_tensor<double>({4, 5, 6}, stream);
  auto p = AFParams<double>::zeros(6, 6);
  auto out = af_forward(f, 12.0, p);
  REQUIRE(out.shape() == f.shape());
  for (int64_t i = 0; i < f.numel(); ++i) CHECK(out[i] == 0.5 * f[i]);
}

TEST_CASE("af_forward preserves shape for randomized extents") {
  RngStream stream(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(stream.next_u64() % 9);
    const int w = 1 + static_cast<int>(stream.next_u64() % 9);
    const int c = 1 + static_cast<int>(stream.next_u64() % 6);
    const int m = 1 + static_cast<int>(stream.next_u64() % 6);
    Tensor<double> f = testutil::random_tensor<double>({h, w, c}, stream);
    auto p = random_params(c, m, stream);
    auto out = af_forward(f, stream.uniform(0, 20), p);
    CHECK(out.shape() == f.shape());
  }
}

TEST_CASE("af_forward equals the chained four operations bit for bit") {
  RngStream stream(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 1 + static_cast<int>(stream.next_u64() % 5);
    Tensor<double> f =
        testutil::random_tensor<double>({2 + static_cast<int>(stream.next_u64() % 4),
                                         2 + static_cast<int>(stream.next_u64() % 4), c},
                                        stream);
    auto p = random_params(c, c, stream);
    const double mu = stream.uniform(0, 20);

    auto chained =
        recalibrate(f, predict_factors(build_context(global_average_pool(f), mu), p));
    auto fused = af_forward(f, mu, p);
    REQUIRE(fused.shape() == chained.shape());
    for (int64_t i = 0; i < fused.numel(); ++i) CHECK(fused[i] == chained[i]);

    // The graph path must agree bit-for-bit as well (same kernels underneath).
    Graph<double> g;
    Tensor<double> fb({1, f.dim(0), f.dim(1), c}, f.vec());
    const int x = g.add_leaf_ref(&fb, false);
    Tensor<double> snr({1, 1}, {mu});
    const int snr_id = g.add_leaf_ref(&snr, false);
    auto nodes = af_forward_graph(g, x, snr_id, g.add_leaf_ref(&p.w1, false),
                                  g.add_leaf_ref(&p.b1, false), g.add_leaf_ref(&p.w2, false),
                                  g.add_leaf_ref(&p.b2, false));
    const Tensor<double>& gv = g.val(nodes.output);
    for (int64_t i = 0; i < fused.numel(); ++i) CHECK(gv[i] == fused[i]);
  }
}

TEST_CASE("af_forward gradients match finite differences") {
  RngStream stream(23);
  const int c = 3, m = 4;
  Tensor<double> f = testutil::random_tensor<double>({1, 3, 4, c}, stream);
  Tensor<double> snr({1, 1}, {stream.uniform(0, 20)});
  auto p = random_params(c, m, stream);
  Tensor<double> target = testutil::random_tensor<double>({1, 3, 4, c}, stream);

  auto build = [&](Graph<double>& g, bool grads) {
    const int x = g.add_leaf_ref(&f, grads);
    const int mu = g.add_leaf_ref(&snr, grads);
    auto nodes = af_forward_graph(g, x, mu, g.add_leaf_ref(&p.w1, grads),
                                  g.add_leaf_ref(&p.b1, grads), g.add_leaf_ref(&p.w2, grads),
                                  g.add_leaf_ref(&p.b2, grads));
    return std::pair<int, int>(nodes.output, x);
  };

  auto eval = [&]() {
    Graph<double> g;
    auto [out, x] = build(g, false);
    const Tensor<double>& y = g.val(out);
    double acc = 0.0;
    for (int64_t i = 0; i < y.numel(); ++i) {
      const double d = y[i] - target[i];
      acc += d * d;
    }
    return acc / static_cast<double>(y.numel());
  };

  Graph<double> g;
  const int x = g.add_leaf_ref(&f, true);
  const int mu = g.add_leaf_ref(&snr, true);
  const int w1 = g.add_leaf_ref(&p.w1, true);
  const int b1 = g.add_leaf_ref(&p.b1, true);
  const int w2 = g.add_leaf_ref(&p.w2, true);
  const int b2 = g.add_leaf_ref(&p.b2, true);
  auto nodes = af_forward_graph(g, x, mu, w1, b1, w2, b2);
  const int loss = ops::mse_against(g, nodes.output, target);
  g.backward(loss);

  const std::vector<std::pair<Tensor<double>*, int>> checks = {
      {&f, x}, {&snr, mu}, {&p.w1, w1}, {&p.b1, b1}, {&p.w2, w2}, {&p.b2, b2}};
  for (auto [tensor, id] : checks) {
    Tensor<double> fd = testutil::finite_diff(*tensor, eval);
    const double err = testutil::max_rel_error(g.grad(id), fd);
    INFO("rel err ", err);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("snr input is live: dS/dmu is nonzero for random parameters") {
  RngStream stream(29);
  int live = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 2 + static_cast<int>(stream.next_u64() % 4);
    auto p = random_params(c, c, stream);
    // Keep the hidden layer live; an all-dead ReLU layer has a legitimately
    // zero gradient and would not probe the mu path.
    for (int64_t i = 0; i < p.b1.numel(); ++i) p.b1[i] = stream.uniform(0.5, 1.0);
    Tensor<double> f = testutil::random_tensor<double>({1, 3, 3, c}, stream);
    Tensor<double> snr({1, 1}, {stream.uniform(0, 20)});

    Graph<double> g;
    const int x = g.add_leaf_ref(&f, false);
    const int mu = g.add_leaf_ref(&snr, true);
    auto nodes = af_forward_graph(g, x, mu, g.add_leaf_ref(&p.w1, false),
                                  g.add_leaf_ref(&p.b1, false), g.add_leaf_ref(&p.w2, false),
                                  g.add_leaf_ref(&p.b2, false));
    // Mean factor as the probe scalar.
    const int loss = ops::mse_against(g, nodes.factors, Tensor<double>({1, c}));
    g.backward(loss);
    if (std::abs(g.grad(mu)[0]) > 0.0) ++live;
  }
  CHECK(live == 10);
}
