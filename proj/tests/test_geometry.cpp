#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "bev/geometry.hpp"
#include "bev/rng.hpp"

using namespace bev;

namespace {

Quaternion random_unit_quat(Rng& rng) {
  while (true) {
    Quaternion q{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const double n = q.norm();
    if (n > 0.1 && n <= 1.0) return q.normalized();
  }
}

CameraModel random_camera(Rng& rng) {
  CameraModel cam;
  cam.name = "test";
  cam.intrinsics = {rng.uniform(300.0, 900.0), rng.uniform(300.0, 900.0),
                    rng.uniform(500.0, 780.0), rng.uniform(260.0, 460.0), 1280, 720};
  cam.extrinsics.rotation = random_unit_quat(rng);
  cam.extrinsics.translation = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                                rng.uniform(0.5, 3.0)};
  return cam;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
  return m;
}

}  // namespace

TEST_CASE("quat_to_matrix known rotations") {
  CHECK(max_abs_diff(quat_to_matrix({1, 0, 0, 0}), Mat3::identity()) == 0.0);

  // 180 degrees about z.
  const Mat3 rz180 = quat_to_matrix({0, 0, 0, 1});
  Mat3 expect = Mat3::identity();
  expect(0, 0) = -1;
  expect(1, 1) = -1;
  CHECK(max_abs_diff(rz180, expect) <= 1e-15);

  // 90 degrees about z: column 1 (image of x) is (0, 1, 0).
  const double s = std::sqrt(0.5);
  const Mat3 rz90 = quat_to_matrix({s, 0, 0, s});
  CHECK(rz90(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rz90(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rz90(2, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("quat_to_matrix rejects non-unit input") {
  CHECK_THROWS_AS(quat_to_matrix({1.0, 0.1, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("quat_to_matrix is orthonormal and proper for random unit quaternions") {
  Rng rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    const Quaternion q = random_unit_quat(rng);
    const Mat3 r = quat_to_matrix(q);
    const Mat3 rtr = r.transposed() * r;
    CHECK(max_abs_diff(rtr, Mat3::identity()) < 1e-12);
    CHECK(std::abs(r.det() - 1.0) < 1e-12);
  }
}

TEST_CASE("quat_from_matrix round-trips") {
  Rng rng(777);
  for (int trial = 0; trial < 500; ++trial) {
    const Quaternion q = random_unit_quat(rng);
    const Mat3 r = quat_to_matrix(q);
    const Quaternion back = quat_from_matrix(r);
    CHECK(max_abs_diff(quat_to_matrix(back), r) < 1e-12);
  }
}

TEST_CASE("unproject_pixel principal point and hand case") {
  CameraIntrinsics k{500, 500, 640, 360, 1280, 720};
  const Vec3 on_axis = unproject_pixel(640, 360, 10, k);
  CHECK(on_axis.x == 0.0);
  CHECK(on_axis.y == 0.0);
  CHECK(on_axis.z == 10.0);

  const Vec3 p = unproject_pixel(1140, 360, 10, k);
  CHECK(p.x == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(p.y == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p.z == 10.0);
}

TEST_CASE("unproject_pixel is linear in depth") {
  CameraIntrinsics k{432.5, 511.25, 633.1, 377.7, 1280, 720};
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const double u = rng.uniform(0.0, 1280.0);
    const double v = rng.uniform(0.0, 720.0);
    const double s = rng.uniform(0.1, 50.0);
    const Vec3 base = unproject_pixel(u, v, 1.0, k);
    const Vec3 scaled = unproject_pixel(u, v, s, k);
    CHECK(scaled.x == doctest::Approx(s * base.x).epsilon(1e-12));
    CHECK(scaled.y == doctest::Approx(s * base.y).epsilon(1e-12));
    CHECK(scaled.z == doctest::Approx(s * base.z).epsilon(1e-12));
  }
}

TEST_CASE("unproject_pixel rejects non-positive depth") {
  CameraIntrinsics k{500, 500, 640, 360, 1280, 720};
  CHECK_THROWS_AS(unproject_pixel(0, 0, 0.0, k), std::invalid_argument);
  CHECK_THROWS_AS(unproject_pixel(0, 0, -2.0, k), std::invalid_argument);
}

TEST_CASE("camera_to_vehicle identity, translation and rotation") {
  CameraExtrinsics ident;
  const Vec3 p{1.5, -2.0, 3.0};
  const Vec3 same = camera_to_vehicle(p, ident);
  CHECK(same.x == p.x);
  CHECK(same.y == p.y);
  CHECK(same.z == p.z);

  CameraExtrinsics shift;
  shift.translation = {1, 2, 3};
  const Vec3 t = camera_to_vehicle({0, 0, 0}, shift);
  CHECK(t.x == 1.0);
  CHECK(t.y == 2.0);
  CHECK(t.z == 3.0);

  CameraExtrinsics rot90;
  const double s = std::sqrt(0.5);
  rot90.rotation = {s, 0, 0, s};
  const Vec3 r = camera_to_vehicle({1, 0, 0}, rot90);
  CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.y == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("vehicle_to_pixel inverts the unprojection") {
  CameraModel cam;
  cam.intrinsics = {500, 500, 640, 360, 1280, 720};
  const Vec3 p_veh = camera_to_vehicle(unproject_pixel(1140, 360, 10, cam.intrinsics),
                                       cam.extrinsics);
  const auto proj = vehicle_to_pixel(p_veh, cam);
  REQUIRE(proj.has_value());
  CHECK(proj->u == doctest::Approx(1140.0).epsilon(1e-12));
  CHECK(proj->v == doctest::Approx(360.0).epsilon(1e-12));
  CHECK(proj->depth == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("vehicle_to_pixel reports behind-camera as a value") {
  CameraModel cam;
  cam.intrinsics = {500, 500, 640, 360, 1280, 720};
  cam.extrinsics.translation = {0, 0, 2};
  CHECK_FALSE(vehicle_to_pixel({0, 0, 2}, cam).has_value());  // at the center
  CHECK_FALSE(vehicle_to_pixel({0, 0, -5}, cam).has_value());
}

TEST_CASE("projection round-trip property") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const CameraModel cam = random_camera(rng);
    const double u = rng.uniform(0.0, 1280.0);
    const double v = rng.uniform(0.0, 720.0);
    const double d = rng.uniform(0.2, 80.0);
    const Vec3 p_veh = camera_to_vehicle(unproject_pixel(u, v, d, cam.intrinsics),
                                         cam.extrinsics);
    const auto proj = vehicle_to_pixel(p_veh, cam);
    REQUIRE(proj.has_value());
    const Vec3 back = camera_to_vehicle(
        unproject_pixel(proj->u, proj->v, proj->depth, cam.intrinsics), cam.extrinsics);
    CHECK((back - p_veh).norm() < 1e-9);
  }
}

TEST_CASE("depth binning centers are uniform and exact") {
  const DepthBinning bins = DepthBinning::uniform();
  REQUIRE(bins.count == 60);
  CHECK(bins.centers.front() == 1.0);
  CHECK(bins.centers.back() == 60.0);
  for (int i = 0; i < 60; ++i) CHECK(bins.centers[i] == doctest::Approx(1.0 + i).epsilon(1e-15));
  bins.validate();
}

TEST_CASE("build_frustum shape for the full-resolution setup") {
  CameraModel cam;
  cam.name = "front";
  cam.intrinsics = {500, 500, 640, 360, 1280, 720};
  const auto grid = FeatureGridSpec::for_image(cam.intrinsics, 8);
  CHECK(grid.h_cells == 90);
  CHECK(grid.w_cells == 160);
  const FrustumGrid f = build_frustum(cam, DepthBinning::uniform(), grid);
  CHECK(f.h_cells == 90);
  CHECK(f.w_cells == 160);
  CHECK(f.depth_bins == 60);
  CHECK(f.points.size() == 90u * 160u * 60u * 3u);
}

TEST_CASE("build_frustum rejects a stride that does not divide the image") {
  CameraModel cam;
  cam.intrinsics = {500, 500, 320, 180, 641, 360};
  CHECK_THROWS_AS(FeatureGridSpec::for_image(cam.intrinsics, 8), std::invalid_argument);
}

TEST_CASE("single-bin frustum lies on the pixel rays at depth 1") {
  CameraModel cam;
  cam.intrinsics = {400, 400, 320, 180, 640, 360};
  cam.extrinsics.translation = {0.3, -0.2, 1.7};
  Rng rng(5);
  cam.extrinsics.rotation = random_unit_quat(rng);
  const DepthBinning bins = DepthBinning::uniform(1.0, 1.0, 1);
  const auto grid = FeatureGridSpec::for_image(cam.intrinsics, 8);
  const FrustumGrid f = build_frustum(cam, bins, grid);
  for (int i = 0; i < grid.h_cells; i += 7) {
    for (int j = 0; j < grid.w_cells; j += 13) {
      const Vec3 expect = camera_to_vehicle(
          unproject_pixel((j + 0.5) * 8, (i + 0.5) * 8, 1.0, cam.intrinsics),
          cam.extrinsics);
      const Vec3 got = f.at(i, j, 0);
      CHECK((got - expect).norm() == 0.0);
    }
  }
}

TEST_CASE("frustum lattice reprojects to its own pixel and depth") {
  CameraModel cam;
  cam.name = "front";
  cam.intrinsics = {350, 350, 16, 16, 32, 32};
  cam.extrinsics.translation = {1.0, 0.5, 1.5};
  Rng rng(31);
  cam.extrinsics.rotation = random_unit_quat(rng);
  const DepthBinning bins = DepthBinning::uniform(1.0, 9.0, 3);
  const auto grid = FeatureGridSpec::for_image(cam.intrinsics, 8);
  REQUIRE(grid.h_cells == 4);
  REQUIRE(grid.w_cells == 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 3; ++k) {
        const Vec3 p = build_frustum(cam, bins, grid).at(i, j, k);
        const auto proj = vehicle_to_pixel(p, cam);
        REQUIRE(proj.has_value());
        CHECK(std::abs(proj->u - (j + 0.5) * 8) < 1e-9);
        CHECK(std::abs(proj->v - (i + 0.5) * 8) < 1e-9);
        CHECK(std::abs(proj->depth - bins.centers[k]) < 1e-9);
      }
    }
  }
}

TEST_CASE("build_frustum is bitwise deterministic") {
  Rng rng(404);
  const CameraModel cam = random_camera(rng);
  const DepthBinning bins = DepthBinning::uniform(1, 60, 12);
  const auto grid = FeatureGridSpec::for_image(cam.intrinsics, 8);
  const FrustumGrid a = build_frustum(cam, bins, grid);
  const FrustumGrid b = build_frustum(cam, bins, grid);
  REQUIRE(a.points.size() == b.points.size());
  CHECK(std::memcmp(a.points.data(), b.points.data(), a.points.size() * sizeof(double)) == 0);
}

TEST_CASE("intrinsics and rig validation") {
  CameraIntrinsics bad{-1, 500, 640, 360, 1280, 720};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  CameraRig rig;
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);
  CameraModel cam;
  cam.name = "front";
  cam.intrinsics = {500, 500, 640, 360, 1280, 720};
  rig.cameras.push_back(cam);
  rig.cameras.push_back(cam);  // duplicate name
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);
}
