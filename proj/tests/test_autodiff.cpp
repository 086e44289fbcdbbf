#include <doctest.h>

#include "jscc/graph.hpp"
#include "jscc/ops.hpp"
#include "testutil.hpp"

using jscc::Graph;
using jscc::RngStream;
using jscc::Tensor;
namespace ops = jscc::ops;

namespace {

/// Builds mean((f(inputs) - target)^2) with fresh leaves over the given
/// tensors and returns (loss value, gradients of each tensor).
struct CheckResult {
  double loss = 0.0;
  std::vector<Tensor<double>> grads;
};

using ForwardFn = std::function<int(Graph<double>&, const std::vector<int>&)>;

CheckResult run_with_grads(std::vector<Tensor<double>*> tensors, const Tensor<double>& target,
                           const ForwardFn& forward) {
  Graph<double> g;
  std::vector<int> ids;
  for (auto* t : tensors) ids.push_back(g.add_leaf_ref(t, true));
  const int out = forward(g, ids);
  const int loss = ops::mse_against(g, out, target);
  g.backward(loss);
  CheckResult result;
  result.loss = g.val(loss)[0];
  for (int id : ids) result.grads.push_back(g.grad(id));
  return result;
}

double eval_loss(std::vector<Tensor<double>*> tensors, const Tensor<double>& target,
                 const ForwardFn& forward) {
  Graph<double> g;
  std::vector<int> ids;
  for (auto* t : tensors) ids.push_back(g.add_leaf_ref(t, false));
  const int out = forward(g, ids);
  Graph<double> g2;  // mse without grad
  (void)g2;
  const Tensor<double>& y = g.val(out);
  double acc = 0.0;
  for (int64_t i = 0; i < y.numel(); ++i) {
    const double d = y[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(y.numel());
}

/// Checks every tensor's analytic gradient against central differences.
void check_gradients(std::vector<Tensor<double>*> tensors, const ForwardFn& forward,
                     double tol = 1e-6) {
  RngStream stream(99);
  // Shape the target after one forward pass.
  Tensor<double> probe_target;
  {
    Graph<double> g;
    std::vector<int> ids;
    for (auto* t : tensors) ids.push_back(g.add_leaf_ref(t, false));
    const int out = forward(g, ids);
    probe_target = testutil::random_tensor<double>(g.val(out).shape(), stream);
  }
  CheckResult analytic = run_with_grads(tensors, probe_target, forward);
  for (size_t i = 0; i < tensors.size(); ++i) {
    auto eval = [&]() { return eval_loss(tensors, probe_target, forward); };
    Tensor<double> fd = testutil::finite_diff(*tensors[i], eval);
    const double err = testutil::max_rel_error(analytic.grads[i], fd);
    INFO("tensor ", i, " rel err ", err);
    CHECK(err < tol);
  }
}

}  // namespace

TEST_CASE("tape accumulates gradients through shared nodes") {
  Graph<double> g;
  Tensor<double> xv({2}, {3.0, -2.0});
  const int x = g.add_leaf(xv, true);
  // y = sigmoid(x) + sigmoid(x) reused via two paths into one mse.
  const int s = ops::sigmoid(g, x);
  const int sum = ops::add_constant(g, s, Tensor<double>({2}, {0.0, 0.0}));
  Tensor<double> target({2}, {1.0, 0.0});
  const int loss = ops::mse_against(g, sum, target);
  g.backward(loss);
  CHECK(g.has_grad(x));
  CHECK(g.grad(x).numel() == 2);
}

TEST_CASE("conv2d matches finite differences") {
  RngStream stream(7);
  for (int stride : {1, 2}) {
    Tensor<double> x = testutil::random_tensor<double>({2, 6, 6, 3}, stream);
    Tensor<double> w = testutil::random_tensor<double>({3, 3, 3, 4}, stream, -0.5, 0.5);
    Tensor<double> b = testutil::random_tensor<double>({4}, stream, -0.2, 0.2);
    check_gradients({&x, &w, &b}, [stride](Graph<double>& g, const std::vector<int>& ids) {
      return ops::conv2d(g, ids[0], ids[1], ids[2], stride);
    });
  }
}

TEST_CASE("conv2d shape algebra and divisibility") {
  Graph<double> g;
  RngStream stream(3);
  Tensor<double> x = testutil::random_tensor<double>({1, 32, 32, 3}, stream);
  Tensor<double> w = testutil::random_tensor<double>({5, 5, 3, 8}, stream);
  Tensor<double> b({8});
  const int xid = g.add_leaf(x, false);
  const int wid = g.add_leaf(w, false);
  const int bid = g.add_leaf(b, false);
  const int y = ops::conv2d(g, xid, wid, bid, 2);
  CHECK(g.val(y).shape() == std::vector<int>{1, 16, 16, 8});

  Tensor<double> odd = testutil::random_tensor<double>({1, 33, 33, 3}, stream);
  const int oid = g.add_leaf(odd, false);
  CHECK_THROWS_WITH_AS(ops::conv2d(g, oid, wid, bid, 2),
                       doctest::Contains("must be a multiple of"), std::invalid_argument);
}

TEST_CASE("tconv2d matches finite differences") {
  RngStream stream(11);
  for (int stride : {1, 2}) {
    Tensor<double> x = testutil::random_tensor<double>({2, 3, 3, 4}, stream);
    Tensor<double> w = testutil::random_tensor<double>({3, 3, 5, 4}, stream, -0.5, 0.5);
    Tensor<double> b = testutil::random_tensor<double>({5}, stream, -0.2, 0.2);
    check_gradients({&x, &w, &b}, [stride](Graph<double>& g, const std::vector<int>& ids) {
      return ops::tconv2d(g, ids[0], ids[1], ids[2], stride);
    });
  }
}

TEST_CASE("tconv2d upsamples and is adjoint to conv2d") {
  RngStream stream(13);
  // <conv(x), y> must equal <x, tconv(y)> when they share a kernel and no bias.
  Tensor<double> x = testutil::random_tensor<double>({1, 8, 8, 3}, stream);
  Tensor<double> w = testutil::random_tensor<double>({5, 5, 3, 6}, stream);
  Tensor<double> y = testutil::random_tensor<double>({1, 4, 4, 6}, stream);
  Tensor<double> b_small({6});
  Tensor<double> b_big({3});

  Graph<double> g;
  const int conv_out = ops::conv2d(g, g.add_leaf(x, false), g.add_leaf(w, false),
                                   g.add_leaf(b_small, false), 2);
  const int tconv_out = ops::tconv2d(g, g.add_leaf(y, false), g.add_leaf(w, false),
                                     g.add_leaf(b_big, false), 2);
  CHECK(g.val(tconv_out).shape() == std::vector<int>{1, 8, 8, 3});

  double lhs = 0.0, rhs = 0.0;
  const Tensor<double>& cv = g.val(conv_out);
  for (int64_t i = 0; i < cv.numel(); ++i) lhs += cv[i] * y[i];
  const Tensor<double>& tv = g.val(tconv_out);
  for (int64_t i = 0; i < tv.numel(); ++i) rhs += tv[i] * x[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("dense matches finite differences") {
  RngStream stream(17);
  Tensor<double> x = testutil::random_tensor<double>({3, 5}, stream);
  Tensor<double> w = testutil::random_tensor<double>({5, 4}, stream);
  Tensor<double> b = testutil::random_tensor<double>({4}, stream);
  check_gradients({&x, &w, &b}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::dense(g, ids[0], ids[1], ids[2]);
  });
}

TEST_CASE("gdn and igdn match finite differences") {
  RngStream stream(19);
  for (bool inverse : {false, true}) {
    Tensor<double> x = testutil::random_tensor<double>({2, 3, 3, 4}, stream);
    Tensor<double> beta = testutil::random_tensor<double>({4}, stream, 0.5, 1.5);
    Tensor<double> gamma = testutil::random_tensor<double>({4, 4}, stream, 0.0, 0.3);
    check_gradients({&x, &beta, &gamma},
                    [inverse](Graph<double>& g, const std::vector<int>& ids) {
                      return ops::gdn(g, ids[0], ids[1], ids[2], inverse);
                    });
  }
}

TEST_CASE("gdn rejects nonpositive beta") {
  Graph<double> g;
  Tensor<double> x({1, 2, 2, 1}, {1, 2, 3, 4});
  Tensor<double> beta({1}, {0.0});
  Tensor<double> gamma({1, 1}, {0.1});
  CHECK_THROWS_AS(ops::gdn(g, g.add_leaf(x, false), g.add_leaf(beta, false),
                           g.add_leaf(gamma, false), false),
                  std::domain_error);
}

TEST_CASE("prelu matches finite differences") {
  RngStream stream(23);
  Tensor<double> x = testutil::random_tensor<double>({2, 4, 4, 3}, stream);
  Tensor<double> a = testutil::random_tensor<double>({3}, stream, 0.05, 0.5);
  check_gradients({&x, &a}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::prelu(g, ids[0], ids[1]);
  });
}

TEST_CASE("elementwise activations match finite differences") {
  RngStream stream(29);
  Tensor<double> x = testutil::random_tensor<double>({3, 7}, stream, -2.0, 2.0);
  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::sigmoid(g, ids[0]);
  });
  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::relu(g, ids[0]);
  });
  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::softplus_floor(g, ids[0], 1e-6);
  });
}

TEST_CASE("pooling, concat, scaling, reshape match finite differences") {
  RngStream stream(31);
  Tensor<double> x = testutil::random_tensor<double>({2, 3, 5, 4}, stream);
  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::global_avg_pool(g, ids[0]);
  });

  Tensor<double> snr = testutil::random_tensor<double>({2, 1}, stream, 0.0, 20.0);
  Tensor<double> pooled = testutil::random_tensor<double>({2, 4}, stream);
  check_gradients({&snr, &pooled}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::concat_cols(g, ids[0], ids[1]);
  });

  Tensor<double> s = testutil::random_tensor<double>({2, 4}, stream, 0.1, 0.9);
  check_gradients({&x, &s}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::scale_channels(g, ids[0], ids[1]);
  });

  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::reshape(g, ids[0], {2, 60});
  });
}

TEST_CASE("power normalization matches finite differences") {
  RngStream stream(37);
  Tensor<double> x = testutil::random_tensor<double>({3, 8}, stream, -2.0, 2.0);
  check_gradients({&x}, [](Graph<double>& g, const std::vector<int>& ids) {
    return ops::power_normalize_rows(g, ids[0]);
  });
}

TEST_CASE("add_constant passes gradients through unchanged") {
  RngStream stream(41);
  Tensor<double> x = testutil::random_tensor<double>({2, 6}, stream);
  Tensor<double> noise = testutil::random_tensor<double>({2, 6}, stream);
  check_gradients({&x}, [&noise](Graph<double>& g, const std::vector<int>& ids) {
    return ops::add_constant(g, ids[0], noise);
  });
}
