#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bev/lift.hpp"
#include "bev/rng.hpp"

using namespace bev;

namespace {

DepthLogits random_logits(Rng& rng, int h, int w, int d) {
  DepthLogits l;
  l.h_cells = h;
  l.w_cells = w;
  l.depth_bins = d;
  l.values.resize(static_cast<std::size_t>(h) * w * d);
  for (auto& v : l.values) v = rng.uniform(-4.0, 4.0);
  return l;
}

FeatureMap random_features(Rng& rng, int h, int w, int c) {
  FeatureMap f = FeatureMap::zeros(h, w, c);
  for (auto& v : f.values) v = rng.uniform(-2.0, 2.0);
  return f;
}

}  // namespace

TEST_CASE("depth_softmax of constant logits is uniform") {
  DepthLogits l;
  l.h_cells = 2;
  l.w_cells = 3;
  l.depth_bins = 60;
  l.values.assign(2 * 3 * 60, 1.7);
  const DepthDistribution d = depth_softmax(l);
  for (const double v : d.values) CHECK(v == doctest::Approx(1.0 / 60).epsilon(1e-12));
}

TEST_CASE("depth_softmax two-bin hand case") {
  DepthLogits l;
  l.h_cells = 1;
  l.w_cells = 1;
  l.depth_bins = 2;
  l.values = {0.0, std::log(3.0)};
  const DepthDistribution d = depth_softmax(l);
  CHECK(d.values[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d.values[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("depth_softmax is shift invariant") {
  Rng rng(42);
  DepthLogits l = random_logits(rng, 3, 4, 16);
  DepthLogits shifted = l;
  for (auto& v : shifted.values) v += 123.5;
  const DepthDistribution a = depth_softmax(l);
  const DepthDistribution b = depth_softmax(shifted);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
  }
}

TEST_CASE("depth_softmax rows sum to one and rejects non-finite input") {
  Rng rng(7);
  DepthLogits l = random_logits(rng, 5, 6, 60);
  const DepthDistribution d = depth_softmax(l);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 6; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 60; ++k) {
        sum += d.at(i, j, k);
        CHECK(d.at(i, j, k) >= 0.0);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
  l.values[3] = std::nan("");
  CHECK_THROWS_AS(depth_softmax(l), std::invalid_argument);
}

TEST_CASE("lift_outer degenerate and uniform distributions") {
  FeatureMap f = FeatureMap::zeros(1, 1, 3);
  f.values = {1.0, -2.0, 0.5};

  DepthDistribution onehot;
  onehot.h_cells = 1;
  onehot.w_cells = 1;
  onehot.depth_bins = 4;
  onehot.values = {0, 0, 1, 0};
  const LiftedFeatures lifted = lift_outer(onehot, f);
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c < 3; ++c) {
      const double expect = k == 2 ? f.values[c] : 0.0;
      CHECK(lifted.values[static_cast<std::size_t>(k) * 3 + c] == expect);
    }
  }

  DepthDistribution uniform = onehot;
  uniform.values = {0.25, 0.25, 0.25, 0.25};
  const LiftedFeatures lifted_u = lift_outer(uniform, f);
  for (int k = 0; k < 4; ++k) {
    for (int c = 0; c < 3; ++c) {
      CHECK(lifted_u.values[static_cast<std::size_t>(k) * 3 + c] ==
            doctest::Approx(f.values[c] / 4).epsilon(1e-15));
    }
  }
}

TEST_CASE("lift_outer conserves per-cell mass") {
  Rng rng(1001);
  for (int inst = 0; inst < 100; ++inst) {
    const int h = rng.uniform_int(1, 5);
    const int w = rng.uniform_int(1, 5);
    const int d = rng.uniform_int(1, 60);
    const int c = rng.uniform_int(1, 8);
    const DepthDistribution dist = depth_softmax(random_logits(rng, h, w, d));
    const FeatureMap feat = random_features(rng, h, w, c);
    const LiftedFeatures lifted = lift_outer(dist, feat);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        for (int ch = 0; ch < c; ++ch) {
          double sum = 0.0;
          for (int k = 0; k < d; ++k) {
            sum += lifted.values[((static_cast<std::size_t>(i) * w + j) * d + k) * c + ch];
          }
          CHECK(std::abs(sum - feat.at(i, j, ch)) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("lift_outer rejects shape mismatch") {
  const FeatureMap f = FeatureMap::zeros(2, 2, 3);
  DepthDistribution d;
  d.h_cells = 2;
  d.w_cells = 3;
  d.depth_bins = 4;
  d.values.assign(2 * 3 * 4, 0.25);
  CHECK_THROWS_AS(lift_outer(d, f), std::invalid_argument);
}

TEST_CASE("depth_map_to_distribution on-center, midpoint and clamp cases") {
  const DepthBinning bins = DepthBinning::uniform();

  const DepthDistribution on_center = depth_map_to_distribution({7.0}, 1, 1, bins);
  for (int k = 0; k < 60; ++k) CHECK(on_center.values[k] == (k == 6 ? 1.0 : 0.0));

  // Midway between the 5 m and 6 m centers: bins 4 and 5 split evenly.
  const DepthDistribution mid = depth_map_to_distribution({5.5}, 1, 1, bins);
  CHECK(mid.values[4] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mid.values[5] == doctest::Approx(0.5).epsilon(1e-12));

  const DepthDistribution low = depth_map_to_distribution({0.2}, 1, 1, bins);
  CHECK(low.values[0] == 1.0);
  const DepthDistribution high = depth_map_to_distribution({99.0}, 1, 1, bins);
  CHECK(high.values[59] == 1.0);
}

TEST_CASE("depth_map_to_distribution rejects bad depths") {
  const DepthBinning bins = DepthBinning::uniform();
  CHECK_THROWS_AS(depth_map_to_distribution({0.0}, 1, 1, bins), std::invalid_argument);
  CHECK_THROWS_AS(depth_map_to_distribution({-3.0}, 1, 1, bins), std::invalid_argument);
  CHECK_THROWS_AS(depth_map_to_distribution({std::nan("")}, 1, 1, bins), std::invalid_argument);
}

TEST_CASE("expected_depth basics") {
  const DepthBinning bins = DepthBinning::uniform();
  DepthDistribution onehot;
  onehot.h_cells = 1;
  onehot.w_cells = 1;
  onehot.depth_bins = 60;
  onehot.values.assign(60, 0.0);
  onehot.values[12] = 1.0;
  CHECK(expected_depth(onehot, bins)[0] == bins.centers[12]);

  DepthDistribution uniform = onehot;
  uniform.values.assign(60, 1.0 / 60);
  CHECK(expected_depth(uniform, bins)[0] == doctest::Approx(30.5).epsilon(1e-12));
}

TEST_CASE("distribution round-trip reproduces depth within half a bin") {
  const DepthBinning bins = DepthBinning::uniform();
  Rng rng(55);
  std::vector<double> depth(64);
  for (auto& d : depth) d = rng.uniform(1.0, 60.0);
  const DepthDistribution dist = depth_map_to_distribution(depth, 8, 8, bins);
  const std::vector<double> back = expected_depth(dist, bins);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    CHECK(std::abs(back[i] - depth[i]) <= 0.5 + 1e-9);
  }

  // Exactly on centers the round-trip is an identity.
  std::vector<double> centers(60);
  for (int k = 0; k < 60; ++k) centers[k] = bins.centers[k];
  const std::vector<double> exact =
      expected_depth(depth_map_to_distribution(centers, 6, 10, bins), bins);
  for (int k = 0; k < 60; ++k) CHECK(std::abs(exact[k] - centers[k]) < 1e-9);
}

TEST_CASE("two-bin split is mean preserving inside the range") {
  const DepthBinning bins = DepthBinning::uniform();
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const double d = rng.uniform(1.0, 60.0);
    const std::vector<double> e = expected_depth(depth_map_to_distribution({d}, 1, 1, bins), bins);
    CHECK(std::abs(e[0] - d) < 1e-9);
  }
}
