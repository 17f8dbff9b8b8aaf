#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <set>

#include "sst/box3d.hpp"

using namespace sst;

namespace {

CameraModel ref_camera() { return CameraModel(1000.0, 1000.0, 640.0, 400.0); }

GroundPlane ref_plane() { return GroundPlane(Vec3(0, 1, 0), -1.5); }

// Ground-truth cuboid used to forward-render detections the module must
// invert.  Width spans across the heading, length along it.
struct OracleBox {
  std::array<Vec3, 4> bottom;  // B1..B4 matching the detection labeling
  double height = 0.0;
  double yaw = 0.0;  // of the effective in-plane heading
};

OracleBox make_oracle_box(double x, double z, double yaw_nominal, double width,
                          double length, double height,
                          const GroundPlane& plane) {
  const Vec3 n = plane.normal();
  const double y = -(plane.a() * x + plane.c() * z + plane.d()) / plane.b();
  const Vec3 g(x, y, z);
  Vec3 h(std::sin(yaw_nominal), 0.0, std::cos(yaw_nominal));
  h = (h - n * n.dot(h)).normalized();
  const Vec3 e = n.cross(h);

  OracleBox box;
  box.bottom[0] = g - 0.5 * length * h - 0.5 * width * e;
  box.bottom[1] = box.bottom[0] + width * e;
  box.bottom[2] = box.bottom[1] + length * h;
  box.bottom[3] = box.bottom[0] + length * h;
  box.height = height;
  box.yaw = std::atan2(h.x(), h.z());
  return box;
}

BoxDetection render_detection(const OracleBox& box, const GroundPlane& plane,
                              const CameraModel& cam) {
  BoxDetection det;
  det.vehicle_id = 1;
  det.b1 = project(box.bottom[0], cam);
  det.b2 = project(box.bottom[1], cam);
  det.b3 = project(box.bottom[2], cam);
  const Vec3 top1 = box.bottom[0] - box.height * plane.normal();
  det.h_px = det.b1.y() - project(top1, cam).y();
  return det;
}

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

void check_box_invariants(const Box3D& box, const GroundPlane& plane) {
  for (const Vec3& b : box.bottom) {
    CHECK(std::abs(plane.signed_distance(b)) < 1e-6);
  }
  // Rectangle: adjacent bottom edges at right angles.
  for (int i = 0; i < 4; ++i) {
    const Vec3 ea = box.bottom[(i + 1) % 4] - box.bottom[i];
    const Vec3 eb = box.bottom[(i + 2) % 4] - box.bottom[(i + 1) % 4];
    const double cosang = ea.normalized().dot(eb.normalized());
    CHECK(std::abs(cosang) < 1e-6);
  }
  const Vec3 n = plane.normal();
  for (int i = 0; i < 4; ++i) {
    CHECK((box.top[i] - (box.bottom[i] - box.height * n)).norm() < 1e-9);
  }
  CHECK((box.bottom[3] - (box.bottom[0] + box.bottom[2] - box.bottom[1]))
            .norm() < 1e-9);
}

}  // namespace

TEST_CASE("reconstruct_box inverts a forward-projected axis-aligned box") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();

  BoxDetection det;
  det.b1 = project(Vec3(-1, 1.5, 10), cam);
  det.b2 = project(Vec3(1, 1.5, 10), cam);
  det.b3 = project(Vec3(1, 1.5, 14), cam);
  det.h_px = 150.0;  // top of B1 at (-1, 0, 10) -> v = 400

  CHECK(det.b1.x() == doctest::Approx(540.0));
  CHECK(det.b1.y() == doctest::Approx(550.0));
  CHECK(det.b2.x() == doctest::Approx(740.0));
  CHECK(det.b3.x() == doctest::Approx(711.4285714286));
  CHECK(det.b3.y() == doctest::Approx(507.1428571429));

  const Box3D box = reconstruct_box(det, cam, plane);
  CHECK((box.bottom[0] - Vec3(-1, 1.5, 10)).norm() < 1e-9);
  CHECK((box.bottom[1] - Vec3(1, 1.5, 10)).norm() < 1e-9);
  CHECK((box.bottom[2] - Vec3(1, 1.5, 14)).norm() < 1e-9);
  CHECK((box.bottom[3] - Vec3(-1, 1.5, 14)).norm() < 1e-9);
  CHECK(box.height == doctest::Approx(1.5).epsilon(1e-9));
  for (const Vec3& t : box.top) CHECK(t.y() == doctest::Approx(0.0));
  CHECK(box.yaw == doctest::Approx(0.0));
  CHECK((box.centroid - Vec3(0, 0.75, 12)).norm() < 1e-9);
  check_box_invariants(box, plane);
}

TEST_CASE("reconstruct_box recovers a quarter-turned box") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();
  const OracleBox oracle =
      make_oracle_box(0.0, 12.0, kPi / 2.0, 2.0, 4.0, 1.5, plane);
  const BoxDetection det = render_detection(oracle, plane, cam);

  const Box3D box = reconstruct_box(det, cam, plane);
  CHECK(wrap_angle(box.yaw - kPi / 2.0) == doctest::Approx(0.0));
  for (int i = 0; i < 4; ++i) {
    CHECK((box.bottom[i] - oracle.bottom[i]).norm() < 1e-6);
  }
  check_box_invariants(box, plane);
}

TEST_CASE("reconstruct_box rejects collinear bottom vertices") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();
  BoxDetection det;
  det.b1 = project(Vec3(-1, 1.5, 10), cam);
  det.b2 = project(Vec3(0, 1.5, 10), cam);
  det.b3 = project(Vec3(1, 1.5, 10), cam);
  det.h_px = 100.0;
  CHECK_THROWS_AS(reconstruct_box(det, cam, plane), NonConvexFootprint);
}

TEST_CASE("reconstruct_box propagates back-projection failures") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();
  BoxDetection det;
  det.b1 = Pixel(540, 550);
  det.b2 = Pixel(740, 550);
  det.b3 = Pixel(640, 300);  // above the horizon
  det.h_px = 100.0;
  CHECK_THROWS_AS(reconstruct_box(det, cam, plane), IntersectionBehindCamera);
}

TEST_CASE("forward-inverse consistency over randomized boxes") {
  const CameraModel cam = ref_camera();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(-6.0, 6.0);
  std::uniform_real_distribution<double> uz(8.0, 30.0);
  std::uniform_real_distribution<double> uyaw(-kPi, kPi);
  std::uniform_real_distribution<double> uw(1.5, 2.2);
  std::uniform_real_distribution<double> ul(3.5, 5.0);
  std::uniform_real_distribution<double> uh(1.2, 1.8);

  SUBCASE("level plane: position, height, and yaw are all tight") {
    const GroundPlane plane = ref_plane();
    int tested = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const OracleBox oracle = make_oracle_box(ux(rng), uz(rng), uyaw(rng),
                                               uw(rng), ul(rng), uh(rng), plane);
      BoxDetection det;
      try {
        det = render_detection(oracle, plane, cam);
      } catch (const PointBehindCamera&) {
        continue;
      }
      const Box3D box = reconstruct_box(det, cam, plane);
      for (int i = 0; i < 4; ++i) {
        CHECK((box.bottom[i] - oracle.bottom[i]).norm() < 1e-6);
      }
      CHECK(std::abs(box.height - oracle.height) < 1e-6);
      CHECK(std::abs(wrap_angle(box.yaw - oracle.yaw)) < 1e-9);
      check_box_invariants(box, plane);
      ++tested;
    }
    CHECK(tested > 50);
  }

  SUBCASE("tilted plane: position and yaw stay tight, height degrades "
          "gracefully") {
    // With a tilted normal the raised pixel no longer shares a column
    // with the top vertex, so height recovery is approximate.
    const GroundPlane plane =
        canonicalize_plane(Vec4(0.01, 1.0, -0.02, -1.52));
    int tested = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const OracleBox oracle = make_oracle_box(ux(rng), uz(rng), uyaw(rng),
                                               uw(rng), ul(rng), uh(rng), plane);
      BoxDetection det;
      try {
        det = render_detection(oracle, plane, cam);
      } catch (const PointBehindCamera&) {
        continue;
      }
      const Box3D box = reconstruct_box(det, cam, plane);
      for (int i = 0; i < 4; ++i) {
        CHECK((box.bottom[i] - oracle.bottom[i]).norm() < 1e-6);
      }
      CHECK(std::abs(wrap_angle(box.yaw - oracle.yaw)) < 1e-9);
      CHECK(std::abs(box.height - oracle.height) < 5e-3);
      check_box_invariants(box, plane);
      ++tested;
    }
    CHECK(tested > 50);
  }
}

TEST_CASE("visible_side_faces picks the camera-facing pair") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();

  const auto reconstruct_at = [&](double x) {
    const OracleBox oracle = make_oracle_box(x, 12.0, 0.0, 2.0, 4.0, 1.5, plane);
    return reconstruct_box(render_detection(oracle, plane, cam), cam, plane);
  };

  SUBCASE("dead ahead: near face, then left by exact tie-break") {
    // Exact symmetric coordinates so the side scores tie bitwise.
    Box3D box;
    box.bottom = {Vec3(-1, 1.5, 10), Vec3(1, 1.5, 10), Vec3(1, 1.5, 14),
                  Vec3(-1, 1.5, 14)};
    box.height = 1.5;
    for (int i = 0; i < 4; ++i) box.top[i] = box.bottom[i] - Vec3(0, 1.5, 0);
    const auto faces = visible_side_faces(box, cam);
    CHECK(faces[0].edge == 0);
    CHECK(faces[1].edge == 3);
    CHECK((faces[0].outward - Vec3(0, 0, -1)).norm() < 1e-9);
    CHECK((faces[1].outward - Vec3(-1, 0, 0)).norm() < 1e-9);
  }
  SUBCASE("box to the right: near face and left face") {
    const auto faces = visible_side_faces(reconstruct_at(5.0), cam);
    CHECK(faces[0].edge == 0);
    CHECK(faces[1].edge == 3);
  }
  SUBCASE("box to the left: near face and right face") {
    const auto faces = visible_side_faces(reconstruct_at(-5.0), cam);
    CHECK(faces[0].edge == 0);
    CHECK(faces[1].edge == 1);
  }
  SUBCASE("face planes pass through their corners") {
    const auto faces = visible_side_faces(reconstruct_at(3.0), cam);
    for (const VerticalFace& f : faces) {
      for (const Vec3& c : f.corners) {
        CHECK(std::abs(f.outward.dot(c) + f.offset) < 1e-9);
      }
    }
  }
}

TEST_CASE("visible_side_faces rejects a camera inside the footprint") {
  Box3D box;
  box.bottom = {Vec3(-2, 1.5, -4), Vec3(2, 1.5, -4), Vec3(2, 1.5, 4),
                Vec3(-2, 1.5, 4)};
  box.height = 1.5;
  for (int i = 0; i < 4; ++i) box.top[i] = box.bottom[i] - Vec3(0, 1.5, 0);
  CHECK_THROWS_AS(visible_side_faces(box, ref_camera()), CameraInsideFootprint);
}

TEST_CASE("lower_half_pixels rasterizes the visible lower faces") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();
  const OracleBox oracle = make_oracle_box(1.5, 12.0, 0.3, 2.0, 4.0, 1.5, plane);
  const Box3D box =
      reconstruct_box(render_detection(oracle, plane, cam), cam, plane);
  const auto faces = visible_side_faces(box, cam);
  const auto pixels = lower_half_pixels(box, faces, cam, 1280, 800);
  CHECK(pixels.size() > 100);

  // Membership: each pixel's viewing ray meets its face plane inside the
  // face's lower half.
  const Vec3 n = box_ground_normal(box);
  for (const FacePixel& fp : pixels) {
    const VerticalFace& f = faces[fp.face];
    const auto hit = try_backproject_to_plane(Pixel(fp.x, fp.y), cam,
                                              f.outward, f.offset);
    REQUIRE(hit);
    CHECK(std::abs(f.outward.dot(*hit) + f.offset) < 1e-6);
    const Vec3 rel = *hit - f.corners[0];
    const Vec3 edge = f.corners[1] - f.corners[0];
    const double along = rel.dot(edge.normalized());
    const double up = rel.dot(-n);
    CHECK(along > -1e-6);
    CHECK(along < edge.norm() + 1e-6);
    CHECK(up > -1e-6);
    CHECK(up < 0.5 * box.height + 1e-6);
  }
}

TEST_CASE("lower_half_pixels propagates projection failures and emptiness") {
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();

  SUBCASE("box behind the camera") {
    Box3D box;
    box.bottom = {Vec3(-1, 1.5, -10), Vec3(1, 1.5, -10), Vec3(1, 1.5, -6),
                  Vec3(-1, 1.5, -6)};
    box.height = 1.5;
    for (int i = 0; i < 4; ++i) box.top[i] = box.bottom[i] - Vec3(0, 1.5, 0);
    std::array<VerticalFace, 2> faces;
    faces[0].corners = {box.bottom[0], box.bottom[1], box.top[1], box.top[0]};
    faces[0].outward = Vec3(0, 0, -1);
    faces[0].offset = -10.0;
    faces[1] = faces[0];
    CHECK_THROWS_AS(lower_half_pixels(box, faces, cam, 1280, 800),
                    PointBehindCamera);
  }
  SUBCASE("box projecting outside the image") {
    const OracleBox oracle =
        make_oracle_box(30.0, 10.0, 0.0, 2.0, 4.0, 1.5, plane);
    Box3D box;
    box.bottom = oracle.bottom;
    box.height = oracle.height;
    for (int i = 0; i < 4; ++i) {
      box.top[i] = box.bottom[i] - oracle.height * plane.normal();
    }
    const auto faces = visible_side_faces(box, cam);
    CHECK_THROWS_AS(lower_half_pixels(box, faces, cam, 1280, 800), EmptyRegion);
  }
}

TEST_CASE("detection_footprint covers the drawn box with dilation") {
  BoxDetection det;
  det.b1 = Pixel(540, 550);
  det.b2 = Pixel(740, 550);
  det.b3 = Pixel(711.43, 507.14);
  det.h_px = 150.0;
  const RectF r = detection_footprint(det);
  CHECK(r.x0 == doctest::Approx(535.0));
  CHECK(r.x1 == doctest::Approx(745.0));
  CHECK(r.y0 == doctest::Approx(352.14));
  CHECK(r.y1 == doctest::Approx(555.0));
  CHECK(r.contains(Pixel(640, 450)));
  CHECK_FALSE(r.contains(Pixel(640, 560)));
}

TEST_CASE("a steeper plane pushes a fixed detection farther out") {
  const CameraModel cam = ref_camera();
  BoxDetection det;
  det.b1 = Pixel(540, 550);
  det.b2 = Pixel(740, 550);
  det.b3 = Pixel(711.4285714286, 507.1428571429);
  det.h_px = 150.0;

  double prev_z = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double delta = -0.02 + 0.01 * i;
    const GroundPlane plane(
        Vec3(0.0, std::cos(delta), -std::sin(delta)), -1.5);
    const Box3D box = reconstruct_box(det, cam, plane);
    const double z = box_bottom_center(box).z();
    if (i > 0) CHECK(z > prev_z);
    prev_z = z;
  }
}

TEST_CASE("lower_half_pixels assigns each pixel to exactly one face") {
  // Dead-ahead box: the runner-up face is nearly edge-on and its screen
  // quad overlaps the near face's. Each pixel must resolve to the face
  // plane its ray meets first, never to both.
  const CameraModel cam = ref_camera();
  const GroundPlane plane = ref_plane();
  const OracleBox oracle = make_oracle_box(0.0, 15.0, 0.0, 2.0, 4.0, 1.5, plane);
  const Box3D box =
      reconstruct_box(render_detection(oracle, plane, cam), cam, plane);
  const auto faces = visible_side_faces(box, cam);
  const auto pixels = lower_half_pixels(box, faces, cam, 1280, 800);

  std::set<std::pair<int, int>> seen;
  int per_face[2] = {0, 0};
  for (const FacePixel& fp : pixels) {
    CHECK(seen.insert({fp.x, fp.y}).second);
    per_face[fp.face] += 1;
  }
  // The camera-facing face dominates; the edge-on face keeps only the
  // sliver outside the near face's quad.
  CHECK(per_face[0] > 10 * per_face[1]);

  const Vec3 n = box_ground_normal(box);
  for (const FacePixel& fp : pixels) {
    const VerticalFace& f = faces[fp.face];
    const auto hit = try_backproject_to_plane(Pixel(fp.x, fp.y), cam,
                                              f.outward, f.offset);
    REQUIRE(hit);
    const Vec3 rel = *hit - f.corners[0];
    const Vec3 edge = f.corners[1] - f.corners[0];
    const double along = rel.dot(edge.normalized());
    const double up = rel.dot(-n);
    CHECK(along > -1e-6);
    CHECK(along < edge.norm() + 1e-6);
    CHECK(up > -1e-6);
    CHECK(up < 0.5 * box.height + 1e-6);
  }
}
