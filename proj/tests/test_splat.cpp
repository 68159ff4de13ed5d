#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "bev/rng.hpp"
#include "bev/splat.hpp"

using namespace bev;

namespace {

// Builds a frustum whose points are arbitrary (not camera-derived) so the
// splat kernels can be driven directly.
FrustumGrid synthetic_frustum(Rng& rng, int h, int w, int d, double spread) {
  FrustumGrid f;
  f.h_cells = h;
  f.w_cells = w;
  f.depth_bins = d;
  f.camera_name = "synthetic";
  f.points.resize(static_cast<std::size_t>(h) * w * d * 3);
  for (std::size_t p = 0; p < f.points.size() / 3; ++p) {
    f.points[3 * p] = rng.uniform(-spread, spread);
    f.points[3 * p + 1] = rng.uniform(-spread, spread);
    f.points[3 * p + 2] = rng.uniform(-2.0, 2.0);
  }
  return f;
}

LiftedFeatures synthetic_lifted(Rng& rng, int h, int w, int d, int c) {
  LiftedFeatures l;
  l.h_cells = h;
  l.w_cells = w;
  l.depth_bins = d;
  l.channels = c;
  l.values.resize(static_cast<std::size_t>(h) * w * d * c);
  for (auto& v : l.values) v = rng.uniform(-1.0, 1.0);
  return l;
}

}  // namespace

TEST_CASE("cell_index hand cases and boundary convention") {
  const BevGridSpec grid = BevGridSpec::standard();
  const auto center = cell_index({0.0, 0.0, 5.0}, grid);
  REQUIRE(center.has_value());
  CHECK(center->ix == 100);
  CHECK(center->iy == 100);

  const auto corner = cell_index({-50.0, -50.0, 0.0}, grid);
  REQUIRE(corner.has_value());
  CHECK(corner->ix == 0);
  CHECK(corner->iy == 0);

  CHECK_FALSE(cell_index({50.0, 50.0, 0.0}, grid).has_value());  // right-open
  CHECK_FALSE(cell_index({999.0, 0.0, 0.0}, grid).has_value());
}

TEST_CASE("splat_reference additivity and empty input") {
  const BevGridSpec grid = BevGridSpec::standard();
  FrustumGrid f;
  f.h_cells = 1;
  f.w_cells = 1;
  f.depth_bins = 2;
  f.points = {0.1, 0.1, 0.0, 0.2, 0.2, 0.0};  // both in cell (100, 100)
  LiftedFeatures l;
  l.h_cells = 1;
  l.w_cells = 1;
  l.depth_bins = 2;
  l.channels = 1;
  l.values = {1.5, 2.25};
  const std::vector<FrustumGrid> fs{f};
  const std::vector<LiftedFeatures> ls{l};
  const BevFeatureMap map = splat_reference(fs, ls, grid);
  CHECK(map.at(100, 100, 0) == 1.5 + 2.25);

  const BevFeatureMap empty = splat_reference({}, {}, grid);
  CHECK(empty.channels == 0);
  CHECK(empty.values.empty());
}

TEST_CASE("splat places a one-hot lift at the expected cell") {
  const BevGridSpec grid = BevGridSpec::standard();
  FrustumGrid f;
  f.h_cells = 1;
  f.w_cells = 1;
  f.depth_bins = 3;
  f.points = {0.0, 0.0, 0.0, 10.0, -3.0, 0.0, 70.0, 0.0, 0.0};  // last is out of range
  LiftedFeatures l;
  l.h_cells = 1;
  l.w_cells = 1;
  l.depth_bins = 3;
  l.channels = 2;
  l.values = {3.0, 0.5, 0.0, 0.0, 9.0, 9.0};
  const std::vector<FrustumGrid> fs{f};
  const std::vector<LiftedFeatures> ls{l};
  const BevFeatureMap map = splat_reference(fs, ls, grid);
  CHECK(map.at(100, 100, 0) == 3.0);
  CHECK(map.at(100, 100, 1) == 0.5);
  double total = 0.0;
  for (const double v : map.values) total += std::abs(v);
  CHECK(total == 3.5);  // out-of-range point contributed nothing
}

TEST_CASE("splat_sorted is bitwise equal to splat_reference") {
  Rng rng(5150);
  for (int inst = 0; inst < 25; ++inst) {
    const int cams = rng.uniform_int(1, 4);
    std::vector<FrustumGrid> fs;
    std::vector<LiftedFeatures> ls;
    const int c = rng.uniform_int(1, 6);
    for (int k = 0; k < cams; ++k) {
      const int h = rng.uniform_int(1, 6);
      const int w = rng.uniform_int(1, 6);
      const int d = rng.uniform_int(1, 20);
      // Narrow spread gives heavy collisions; wide spread gives out-of-range.
      const double spread = inst % 2 == 0 ? 3.0 : 70.0;
      fs.push_back(synthetic_frustum(rng, h, w, d, spread));
      ls.push_back(synthetic_lifted(rng, h, w, d, c));
    }
    const BevFeatureMap ref = splat_reference(fs, ls, BevGridSpec::standard());
    const BevFeatureMap srt = splat_sorted(fs, ls, BevGridSpec::standard());
    REQUIRE(ref.values.size() == srt.values.size());
    CHECK(std::memcmp(ref.values.data(), srt.values.data(),
                      ref.values.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("splat mass conservation against direct summation") {
  Rng rng(808);
  for (int inst = 0; inst < 20; ++inst) {
    const int h = rng.uniform_int(2, 6);
    const int w = rng.uniform_int(2, 6);
    const int d = rng.uniform_int(2, 12);
    const int c = rng.uniform_int(1, 4);
    const FrustumGrid f = synthetic_frustum(rng, h, w, d, 20.0);  // always in range
    const LiftedFeatures l = synthetic_lifted(rng, h, w, d, c);
    const std::vector<FrustumGrid> fs{f};
    const std::vector<LiftedFeatures> ls{l};
    const BevFeatureMap map = splat_reference(fs, ls, BevGridSpec::standard());
    for (int ch = 0; ch < c; ++ch) {
      double direct = 0.0;
      for (std::size_t p = 0; p < l.values.size() / c; ++p) direct += l.values[p * c + ch];
      const double mass = bev_mass(map, ch);
      CHECK(std::abs(mass - direct) <= 1e-5 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("out-of-range points can only lose mass") {
  Rng rng(909);
  for (int inst = 0; inst < 10; ++inst) {
    const FrustumGrid f = synthetic_frustum(rng, 4, 4, 10, 80.0);  // spills past the grid
    LiftedFeatures l = synthetic_lifted(rng, 4, 4, 10, 2);
    for (auto& v : l.values) v = std::abs(v);  // non-negative mass
    const std::vector<FrustumGrid> fs{f};
    const std::vector<LiftedFeatures> ls{l};
    const BevFeatureMap map = splat_reference(fs, ls, BevGridSpec::standard());
    for (int ch = 0; ch < 2; ++ch) {
      double total = 0.0;
      for (std::size_t p = 0; p < l.values.size() / 2; ++p) total += l.values[p * 2 + ch];
      CHECK(bev_mass(map, ch) <= total + 1e-9);
    }
  }
}

TEST_CASE("bev_mass basics and channel validation") {
  const BevGridSpec grid = BevGridSpec::standard();
  BevFeatureMap map;
  map.grid = grid;
  map.channels = 1;
  map.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);
  CHECK(bev_mass(map, 0) == 0.0);
  map.at(3, 7, 0) = 3.0;
  CHECK(bev_mass(map, 0) == 3.0);
  CHECK_THROWS_AS(bev_mass(map, 1), std::invalid_argument);
  CHECK_THROWS_AS(bev_mass(map, -1), std::invalid_argument);
}

TEST_CASE("splat is deterministic across reruns") {
  Rng rng(31337);
  std::vector<FrustumGrid> fs{synthetic_frustum(rng, 4, 4, 8, 10.0)};
  std::vector<LiftedFeatures> ls{synthetic_lifted(rng, 4, 4, 8, 3)};
  const BevFeatureMap a = splat_sorted(fs, ls, BevGridSpec::standard());
  const BevFeatureMap b = splat_sorted(fs, ls, BevGridSpec::standard());
  CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
}

TEST_CASE("splat rejects misaligned inputs") {
  Rng rng(2);
  std::vector<FrustumGrid> fs{synthetic_frustum(rng, 2, 2, 3, 5.0)};
  std::vector<LiftedFeatures> ls{synthetic_lifted(rng, 2, 2, 4, 3)};  // wrong depth axis
  CHECK_THROWS_AS(splat_reference(fs, ls, BevGridSpec::standard()), std::invalid_argument);
}
