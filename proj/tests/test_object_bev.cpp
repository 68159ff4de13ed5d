#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bev/object_bev.hpp"
#include "bev/rng.hpp"

using namespace bev;

namespace {

CameraModel identity_front_camera() {
  // Camera frame z-forward/x-right/y-down mounted looking along vehicle +x.
  CameraModel cam;
  cam.name = "front";
  cam.intrinsics = {500, 500, 640, 360, 1280, 720};
  Mat3 base;
  base(0, 0) = 0; base(0, 1) = 0; base(0, 2) = 1;
  base(1, 0) = -1; base(1, 1) = 0; base(1, 2) = 0;
  base(2, 0) = 0; base(2, 1) = -1; base(2, 2) = 0;
  cam.extrinsics.rotation = quat_from_matrix(base);
  cam.extrinsics.translation = {0, 0, 0};
  return cam;
}

}  // namespace

TEST_CASE("detection_to_bev places a centered detection straight ahead") {
  const CameraModel cam = identity_front_camera();
  Detection2D det;
  det.camera_name = "front";
  det.u_min = 600;
  det.u_max = 680;  // centered at u = 640
  det.v_min = 300;
  det.v_max = 360;
  det.class_id = cls::kVehicle;
  det.confidence = 0.8;
  const BevObject obj = detection_to_bev(det, [](double, double) { return 12.0; }, cam);
  CHECK(obj.x == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(obj.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(obj.yaw == 0.0);
  CHECK(obj.class_id == cls::kVehicle);
  CHECK(obj.confidence == 0.8);
  CHECK(obj.length == 4.5);
  CHECK(obj.width == 2.0);
}

TEST_CASE("detection_to_bev uses the geometry composition exactly") {
  const CameraModel cam = identity_front_camera();
  Detection2D det;
  det.u_min = 100;
  det.u_max = 300;
  det.v_min = 200;
  det.v_max = 500;
  det.class_id = cls::kCyclist;
  det.confidence = 0.5;
  const double depth = 17.25;
  const BevObject obj = detection_to_bev(det, [&](double, double) { return depth; }, cam);
  const Vec3 expect = camera_to_vehicle(unproject_pixel(200, 500, depth, cam.intrinsics),
                                        cam.extrinsics);
  CHECK(obj.x == expect.x);
  CHECK(obj.y == expect.y);
  CHECK(obj.length == 1.8);
  CHECK(obj.width == 0.6);
}

TEST_CASE("detection_to_bev rejects missing depth") {
  const CameraModel cam = identity_front_camera();
  Detection2D det;
  det.u_min = 0;
  det.u_max = 10;
  det.v_min = 0;
  det.v_max = 10;
  CHECK_THROWS_AS(detection_to_bev(det, [](double, double) { return 0.0; }, cam),
                  UnplaceableDetection);
  CHECK_THROWS_AS(detection_to_bev(
                      det, [](double, double) { return std::numeric_limits<double>::infinity(); },
                      cam),
                  UnplaceableDetection);
}

TEST_CASE("embed_objects empty list gives all-zero channels") {
  const ObjectChannels ch = embed_objects({}, BevGridSpec::standard(), cls::kCount);
  for (const double v : ch.values) CHECK(v == 0.0);
}

TEST_CASE("embed_objects writes class, confidence and log-dim at the center cell") {
  BevObject obj;
  obj.x = 0.0;
  obj.y = 0.0;
  obj.class_id = 2;
  obj.confidence = 0.9;
  obj.length = 4.0;
  obj.width = 2.0;
  const std::vector<BevObject> objs{obj};
  const ObjectChannels ch = embed_objects(objs, BevGridSpec::standard(), cls::kCount);
  CHECK(ch.at(100, 100, 2) == 0.9);
  CHECK(ch.at(100, 100, cls::kCount) == 0.9);
  CHECK(ch.at(100, 100, cls::kCount + 1) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
  CHECK(ch.at(100, 101, 2) == 0.0);
}

TEST_CASE("embed_objects collision keeps the higher-confidence object") {
  BevObject strong;
  strong.x = 1.1;
  strong.y = 0.2;
  strong.class_id = 2;
  strong.confidence = 0.9;
  strong.length = 4.0;
  strong.width = 2.0;
  BevObject weak = strong;
  weak.class_id = 3;
  weak.confidence = 0.5;
  weak.length = 1.0;
  weak.width = 1.0;

  std::vector<BevObject> ab{strong, weak};
  std::vector<BevObject> ba{weak, strong};
  const ObjectChannels fwd = embed_objects(ab, BevGridSpec::standard(), cls::kCount);
  const ObjectChannels rev = embed_objects(ba, BevGridSpec::standard(), cls::kCount);
  // Permutation invariance.
  for (std::size_t i = 0; i < fwd.values.size(); ++i) CHECK(fwd.values[i] == rev.values[i]);

  const auto cell = cell_index({strong.x, strong.y, 0}, BevGridSpec::standard());
  REQUIRE(cell.has_value());
  CHECK(fwd.at(cell->ix, cell->iy, 2) == 0.9);
  CHECK(fwd.at(cell->ix, cell->iy, 3) == 0.5);  // max-combined per channel
  CHECK(fwd.at(cell->ix, cell->iy, cls::kCount) == 0.9);
  CHECK(fwd.at(cell->ix, cell->iy, cls::kCount + 1) ==
        doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("embed_objects is idempotent under duplicates and skips out-of-range") {
  BevObject obj;
  obj.x = 3.0;
  obj.y = -2.0;
  obj.class_id = 4;
  obj.confidence = 0.7;
  obj.length = 1.8;
  obj.width = 0.6;
  std::vector<BevObject> once{obj};
  std::vector<BevObject> twice{obj, obj};
  const ObjectChannels a = embed_objects(once, BevGridSpec::standard(), cls::kCount);
  const ObjectChannels b = embed_objects(twice, BevGridSpec::standard(), cls::kCount);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

  BevObject far = obj;
  far.x = 500.0;
  std::vector<BevObject> with_far{obj, far};
  const ObjectChannels c = embed_objects(with_far, BevGridSpec::standard(), cls::kCount);
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == c.values[i]);
}

TEST_CASE("footprint_corners unit square, quarter turn and diagonal") {
  BevObject sq;
  sq.x = 0;
  sq.y = 0;
  sq.yaw = 0;
  sq.length = 1;
  sq.width = 1;
  const auto c = footprint_corners(sq);
  CHECK(c[0].x == doctest::Approx(0.5));
  CHECK(c[0].y == doctest::Approx(0.5));
  CHECK(c[1].x == doctest::Approx(-0.5));
  CHECK(c[1].y == doctest::Approx(0.5));
  CHECK(c[2].x == doctest::Approx(-0.5));
  CHECK(c[2].y == doctest::Approx(-0.5));
  CHECK(c[3].x == doctest::Approx(0.5));
  CHECK(c[3].y == doctest::Approx(-0.5));

  // yaw pi/2 swaps the axes of a 2x1 box.
  BevObject box = sq;
  box.length = 2;
  box.yaw = std::numbers::pi / 2;
  const auto r = footprint_corners(box);
  double max_x = -1e9, max_y = -1e9;
  for (const auto& p : r) {
    max_x = std::max(max_x, std::abs(p.x));
    max_y = std::max(max_y, std::abs(p.y));
  }
  CHECK(max_x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(max_y == doctest::Approx(1.0).epsilon(1e-12));

  // yaw pi/4: rotate the corners by hand.
  BevObject diag = sq;
  diag.length = 2;
  diag.yaw = std::numbers::pi / 4;
  const auto d = footprint_corners(diag);
  const double c45 = std::sqrt(0.5);
  CHECK(d[0].x == doctest::Approx(c45 * 1.0 - c45 * 0.5).epsilon(1e-12));
  CHECK(d[0].y == doctest::Approx(c45 * 1.0 + c45 * 0.5).epsilon(1e-12));
}

TEST_CASE("footprint corners are counter-clockwise for any yaw") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    BevObject o;
    o.x = rng.uniform(-10, 10);
    o.y = rng.uniform(-10, 10);
    o.yaw = rng.uniform(-6.3, 6.3);
    o.length = rng.uniform(0.3, 5.0);
    o.width = rng.uniform(0.3, 3.0);
    const auto c = footprint_corners(o);
    double area2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      const auto& p = c[i];
      const auto& q = c[(i + 1) % 4];
      area2 += p.x * q.y - q.x * p.y;
    }
    CHECK(area2 > 0.0);  // positive signed area = CCW
    CHECK(area2 / 2 == doctest::Approx(o.length * o.width).epsilon(1e-9));
  }
}

TEST_CASE("bilinear_sample interpolates and clamps") {
  // 2x2 map: values 0, 1, 2, 3 row-major.
  const std::vector<double> map{0, 1, 2, 3};
  CHECK(bilinear_sample(map, 2, 2, 0.5, 0.5) == 0.0);   // pixel (0,0) center
  CHECK(bilinear_sample(map, 2, 2, 1.5, 0.5) == 1.0);
  CHECK(bilinear_sample(map, 2, 2, 1.0, 1.0) == doctest::Approx(1.5));  // 4-way mix
  CHECK(bilinear_sample(map, 2, 2, -10.0, -10.0) == 0.0);  // clamped
  CHECK(bilinear_sample(map, 2, 2, 10.0, 10.0) == 3.0);
}
