#include <doctest.h>

#include "helpers.hpp"
#include "ipc/fusion.hpp"
#include "ipc/gradcheck.hpp"

using namespace ipc;
using testing::random_tensor;

namespace {

struct FusionFixture {
  ParamStore<double> store;
  Fusion<double> fusion;

  FusionFixture(std::size_t h, std::size_t heads, std::size_t layers, std::uint64_t seed) {
    ModelConfig c;
    c.hidden = h;
    c.heads = heads;
    c.fusion_layers = layers;
    c.ffn_mult = 2;
    Rng rng(seed);
    fusion = Fusion<double>(store, c, rng);
    testing::randomize(store, rng);
  }
};

oracle::Mat fusion_oracle(const Fusion<double>& f, const oracle::Mat& history, const oracle::Mat& doc,
                          std::vector<oracle::Mat>* self_w = nullptr) {
  using oracle::to_vec;
  oracle::Mat x = oracle::add(history, oracle::positional(history.size(), history[0].size()));
  for (const auto& b : f.blocks()) {
    oracle::Mat w;
    x = oracle::layer_norm(oracle::add(x, oracle::mha(testing::mha_params(b.self_attn), x, x, x.size(), &w)),
                           to_vec(b.norm1.gamma), to_vec(b.norm1.beta));
    if (self_w) {
      self_w->push_back(w);
    }
    x = oracle::layer_norm(oracle::add(x, oracle::mha(testing::mha_params(b.cross_attn), x, doc, doc.size())),
                           to_vec(b.norm2.gamma), to_vec(b.norm2.beta));
    const auto ff = oracle::linear(
        oracle::relu(oracle::linear(x, oracle::to_mat(b.ffn.up.weight), to_vec(b.ffn.up.bias))),
        oracle::to_mat(b.ffn.down.weight), to_vec(b.ffn.down.bias));
    x = oracle::layer_norm(oracle::add(x, ff), to_vec(b.norm3.gamma), to_vec(b.norm3.beta));
  }
  return x;
}

}  // namespace

TEST_CASE("fusion matches the straight-line oracle") {
  FusionFixture f(4, 2, 2, 9);
  Rng rng(1);
  for (std::size_t k : {1, 2, 3}) {
    auto hist = random_tensor<double>({k, 4}, rng);
    auto doc = random_tensor<double>({4, 4}, rng);
    const auto got = oracle::to_mat(f.fusion.fuse(hist, doc, {}));
    CHECK(oracle::max_abs_diff(got, fusion_oracle(f.fusion, oracle::to_mat(hist), oracle::to_mat(doc))) <
          1e-10);
  }
}

TEST_CASE("with a single history row self-attention passes the value projection through") {
  FusionFixture f(4, 2, 1, 3);
  Rng rng(2);
  auto hist = random_tensor<double>({1, 4}, rng);
  auto doc = random_tensor<double>({4, 4}, rng);
  std::vector<AttentionMap> self;
  f.fusion.fuse(hist, doc, {}, nullptr, &self);
  REQUIRE(self.size() == 1);
  CHECK(self[0].weights == std::vector<double>{1.0});
}

TEST_CASE("a single document row makes cross-attention weights exactly one") {
  FusionFixture f(4, 2, 2, 4);
  Rng rng(3);
  auto hist = random_tensor<double>({3, 4}, rng);
  auto doc = random_tensor<double>({1, 4}, rng);
  std::vector<AttentionMap> cross;
  const auto got = oracle::to_mat(f.fusion.fuse(hist, doc, {}, &cross));
  CHECK(oracle::max_abs_diff(got, fusion_oracle(f.fusion, oracle::to_mat(hist), oracle::to_mat(doc))) < 1e-10);
  for (const auto& m : cross) {
    for (double w : m.weights) {
      CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("self-attention over the history is not causally masked") {
  FusionFixture f(4, 2, 1, 5);
  Rng rng(4);
  auto hist = random_tensor<double>({3, 4}, rng);
  auto doc = random_tensor<double>({4, 4}, rng);
  std::vector<AttentionMap> self;
  f.fusion.fuse(hist, doc, {}, nullptr, &self);
  const auto& m = self[0];
  REQUIRE(m.queries == 3);
  REQUIRE(m.keys == 3);
  // Row 0 attends to later positions.
  CHECK(m.weights[1] > 0.0);
  CHECK(m.weights[2] > 0.0);
  std::vector<oracle::Mat> expect;
  fusion_oracle(f.fusion, oracle::to_mat(hist), oracle::to_mat(doc), &expect);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m.weights[i * 3 + j] == doctest::Approx(expect[0][i][j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("cross-attention maps are row-stochastic over the documents") {
  FusionFixture f(4, 2, 3, 6);
  Rng rng(5);
  auto hist = random_tensor<double>({2, 4}, rng);
  auto doc = random_tensor<double>({4, 4}, rng);
  std::vector<AttentionMap> cross;
  f.fusion.fuse(hist, doc, {}, &cross);
  REQUIRE(cross.size() == 3);
  for (const auto& m : cross) {
    CHECK(m.queries == 2);
    CHECK(m.keys == 4);
    for (std::size_t i = 0; i < m.queries; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < m.keys; ++j) {
        CHECK(m.weights[i * m.keys + j] >= 0.0);
        total += m.weights[i * m.keys + j];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("fusion rejects width mismatches") {
  FusionFixture f(4, 2, 1, 7);
  Rng rng(6);
  CHECK_THROWS_AS(f.fusion.fuse(random_tensor<double>({2, 3}, rng), random_tensor<double>({4, 4}, rng), {}),
                  ConfigError);
  CHECK_THROWS_AS(f.fusion.fuse(random_tensor<double>({2, 4}, rng), random_tensor<double>({4, 5}, rng), {}),
                  ConfigError);
}

TEST_CASE("fusion gradient check") {
  FusionFixture f(4, 2, 2, 8);
  Rng rng(7);
  auto hist = random_tensor<double>({3, 4}, rng, true);
  auto doc = random_tensor<double>({4, 4}, rng, true);
  std::vector<Tensor<double>> params{hist, doc};
  for (const auto& [_, t] : f.store.entries()) {
    params.push_back(t);
  }
  auto loss = [&] {
    auto out = f.fusion.fuse(hist, doc, {});
    const std::vector<std::size_t> last{2};
    const std::vector<double> target{1, 0, 0, 1};
    return bce_with_logits(take_rows(out, std::span<const std::size_t>(last)), std::span<const double>(target));
  };
  CHECK(grad_check(loss, params, {1e-5, 8, 1e-5, 2}) < 1e-4);
}
