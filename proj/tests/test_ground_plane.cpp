#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "sst/ground_plane.hpp"

using namespace sst;

namespace {

CameraModel ref_camera() { return CameraModel(1000.0, 1000.0, 640.0, 400.0); }

GroundPlane ref_plane() { return GroundPlane(Vec3(0, 1, 0), -1.5); }

// Fills a depth raster so every pixel sees `plane` through the reference
// camera; off-plane rays (horizon and above) stay 0.
DepthRaster render_plane_depth(const GroundPlane& plane, int w, int h,
                               double k) {
  DepthRaster depth(w, h, 1);
  const CameraModel cam = ref_camera();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto pt = try_backproject_to_plane(Pixel(x, y), cam, plane);
      if (pt) depth.at(x, y) = static_cast<float>(pt->z() / k);
    }
  }
  return depth;
}

double max_coeff_delta(const GroundPlane& a, const GroundPlane& b) {
  return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("depth_to_distance scales linearly") {
  CHECK(depth_to_distance(100.0, DepthScale{0.13}) == doctest::Approx(13.0));
  CHECK(depth_to_distance(0.0, DepthScale{0.42}) == 0.0);
  CHECK(depth_to_distance(7.5, DepthScale{1.0}) == doctest::Approx(7.5));
}

TEST_CASE("default road pattern lands on the expected grid") {
  const RoadSamplePattern p = RoadSamplePattern::grid(1280, 800);
  const Pixel expected[9] = {{448, 624}, {640, 624}, {832, 624},
                             {448, 688}, {640, 688}, {832, 688},
                             {448, 752}, {640, 752}, {832, 752}};
  for (int i = 0; i < 9; ++i) {
    CHECK(p.points[i].x() == doctest::Approx(expected[i].x()));
    CHECK(p.points[i].y() == doctest::Approx(expected[i].y()));
  }
  CHECK_NOTHROW(p.validate(1280, 800));
}

TEST_CASE("pattern validation rejects out-of-image and duplicate points") {
  CHECK_THROWS_AS(RoadSamplePattern::grid(1280, 800, {0.78, 0.86, 1.0}),
                  InvalidArgument);
  CHECK_THROWS_AS(RoadSamplePattern::grid(1280, 800, {0.78, 0.86, 0.94},
                                          {0.5, 0.5, 0.65}),
                  InvalidArgument);
}

TEST_CASE("sample_road_points masks pattern pixels by footprints") {
  const RoadSamplePattern p = RoadSamplePattern::grid(1280, 800);

  SUBCASE("no detections keeps all nine") {
    CHECK(sample_road_points(p, {}).size() == 9);
  }
  SUBCASE("a footprint over the left column removes three") {
    const std::vector<RectF> fp = {{400, 600, 500, 780}};
    const auto kept = sample_road_points(p, fp);
    CHECK(kept.size() == 6);
    for (const Pixel& q : kept) CHECK(q.x() > 500.0);
  }
  SUBCASE("footprints covering seven points leave too few") {
    const std::vector<RectF> fp = {{400, 600, 900, 700},  // top two rows
                                   {440, 745, 460, 760}};  // bottom-left
    CHECK_THROWS_AS(sample_road_points(p, fp), InsufficientRoadPoints);
  }
}

TEST_CASE("lift_road_points places points on the viewing ray at planar depth") {
  const CameraModel cam = ref_camera();
  const DepthScale scale{0.13};
  DepthRaster depth(1280, 800, 1);
  depth.at(640, 500) = 115.384615f;  // 15 m / 0.13
  depth.at(640, 400) = 100.0f;
  depth.at(740, 500) = 115.384615f;

  const auto pts = lift_road_points(
      {Pixel(640, 500), Pixel(640, 400), Pixel(740, 500)}, depth, scale, cam);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].x() == doctest::Approx(0.0));
  CHECK(pts[0].y() == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(pts[0].z() == doctest::Approx(15.0).epsilon(1e-5));
  CHECK(pts[1].x() == doctest::Approx(0.0));
  CHECK(pts[1].y() == doctest::Approx(0.0));
  CHECK(pts[1].z() == doctest::Approx(13.0).epsilon(1e-6));
  CHECK(pts[2].x() == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(pts[2].y() == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(pts[2].z() == doctest::Approx(15.0).epsilon(1e-5));
}

TEST_CASE("lift_road_points drops unusable samples and reports starvation") {
  const CameraModel cam = ref_camera();
  DepthRaster depth(64, 64, 1);
  const float nan = std::numeric_limits<float>::quiet_NaN();

  std::vector<Pixel> pixels;
  for (int i = 0; i < 9; ++i) pixels.push_back(Pixel(4 + 6 * i, 40));
  for (const Pixel& p : pixels) {
    depth.at(static_cast<int>(p.x()), static_cast<int>(p.y())) = 50.0f;
  }

  SUBCASE("two bad samples still leave seven points") {
    depth.at(4, 40) = nan;
    depth.at(10, 40) = 0.0f;  // "no surface"
    CHECK(lift_road_points(pixels, depth, DepthScale{0.13}, cam).size() == 7);
  }
  SUBCASE("seven bad samples are fatal") {
    for (int i = 0; i < 7; ++i) {
      depth.at(static_cast<int>(pixels[i].x()), 40) = nan;
    }
    CHECK_THROWS_AS(lift_road_points(pixels, depth, DepthScale{0.13}, cam),
                    NonFiniteDepth);
  }
}

TEST_CASE("fit_plane_tls recovers exact planes and rejects degenerate input") {
  std::vector<Vec3> pts = {{0, 1.5, 5},  {2, 1.5, 7},  {-3, 1.5, 9},
                           {1, 1.5, 12}, {-1, 1.5, 6}, {0.5, 1.5, 8}};
  const GroundPlane fit = fit_plane_tls(pts);
  CHECK(max_coeff_delta(fit, ref_plane()) < 1e-12);

  CHECK_THROWS_AS(fit_plane_tls({{0, 0, 1}, {0, 0, 2}}), TooFewPoints);

  std::vector<Vec3> line;
  for (int i = 0; i < 6; ++i) line.push_back(Vec3(i, 1.0 + i, 2.0 * i));
  CHECK_THROWS_AS(fit_plane_tls(line), DegenerateGeometry);
}

TEST_CASE("fit_plane_ransac on noiseless consensus") {
  const RansacParams params;
  std::vector<Vec3> pts;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pts.push_back(Vec3(c - 1.0, 1.5, 5.0 + 2.0 * r + 0.3 * c));
    }
  }
  const GroundPlane fit = fit_plane_ransac(pts, params);
  CHECK(max_coeff_delta(fit, ref_plane()) < 1e-9);

  CHECK_THROWS_AS(fit_plane_ransac({{0, 0, 1}, {1, 0, 1}}, params),
                  TooFewPoints);
}

TEST_CASE("fit_plane_ransac excludes a gross outlier") {
  std::vector<Vec3> pts;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r == 1 && c == 1) continue;
      pts.push_back(Vec3(c - 1.0, 1.5, 5.0 + 2.0 * r + 0.3 * c));
    }
  }
  pts.push_back(Vec3(0, 3.0, 5));  // 1.5 m off the road
  const size_t outlier_idx = pts.size() - 1;

  // Independent exhaustive check: every maximal consensus set at the
  // 0.05 m threshold excludes the outlier.
  int best = -1;
  bool best_has_outlier = false;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      for (size_t k = j + 1; k < n; ++k) {
        const Vec3 cr = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        if (cr.norm() < 1e-12) continue;
        const Vec3 nn = cr.normalized();
        const double d = -nn.dot(pts[i]);
        int count = 0;
        bool has_outlier = false;
        for (size_t p = 0; p < n; ++p) {
          if (std::abs(nn.dot(pts[p]) + d) <= 0.05) {
            ++count;
            if (p == outlier_idx) has_outlier = true;
          }
        }
        if (count > best) {
          best = count;
          best_has_outlier = has_outlier;
        } else if (count == best && has_outlier) {
          best_has_outlier = true;  // a tying set containing it would be a flaw
        }
      }
    }
  }
  CHECK(best == 8);
  CHECK_FALSE(best_has_outlier);

  int consensus = 0;
  const GroundPlane fit = fit_plane_ransac(pts, RansacParams{}, &consensus);
  CHECK(max_coeff_delta(fit, ref_plane()) < 1e-9);
  CHECK(consensus == 8);
}

TEST_CASE("consensus size reports the winning hypothesis count") {
  // All points exactly coplanar: any triple seats the full set.
  std::vector<Vec3> pts;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pts.push_back(Vec3(c - 1.0, 1.5, 5.0 + 2.0 * r + 0.3 * c));
    }
  }
  int consensus = 0;
  fit_plane_ransac(pts, RansacParams{}, &consensus);
  CHECK(consensus == 9);

  // Two displaced points shrink the consensus to the coplanar seven.
  pts[1].y() += 0.8;
  pts[6].y() -= 0.6;
  fit_plane_ransac(pts, RansacParams{}, &consensus);
  CHECK(consensus == 7);
}

TEST_CASE("fit_plane_ransac is deterministic for a fixed seed") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<Vec3> pts;
  for (int i = 0; i < 12; ++i) {
    pts.push_back(Vec3(std::cos(i * 0.7) * 3.0, 1.5 + noise(rng),
                       6.0 + 0.9 * i));
  }
  const GroundPlane a = fit_plane_ransac(pts, RansacParams{100, 0.05, 7});
  const GroundPlane b = fit_plane_ransac(pts, RansacParams{100, 0.05, 7});
  CHECK(a.coeffs() == b.coeffs());  // bit-for-bit
}

TEST_CASE("noiseless ransac matches the direct total-least-squares fit") {
  const GroundPlane truth = canonicalize_plane(Vec4(0.02, 1.0, -0.015, -1.42));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-4.0, 4.0);
  std::uniform_real_distribution<double> uz(4.0, 30.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) {
    const double x = ux(rng);
    const double z = uz(rng);
    const double y = -(truth.a() * x + truth.c() * z + truth.d()) / truth.b();
    pts.push_back(Vec3(x, y, z));
  }
  const GroundPlane direct = fit_plane_tls(pts);
  const GroundPlane sampled = fit_plane_ransac(pts, RansacParams{});
  CHECK(max_coeff_delta(direct, sampled) < 1e-9);
  CHECK(max_coeff_delta(direct, truth) < 1e-9);
}

TEST_CASE("one gross outlier never moves the consensus plane") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::uniform_real_distribution<double> uz(4.0, 25.0);
  std::uniform_real_distribution<double> tilt(-0.01, 0.01);

  for (int trial = 0; trial < 20; ++trial) {
    const GroundPlane truth =
        canonicalize_plane(Vec4(tilt(rng), 1.0, tilt(rng), -1.5 + tilt(rng)));
    std::vector<Vec3> pts;
    for (int i = 0; i < 12; ++i) {
      const double x = ux(rng);
      const double z = uz(rng);
      const double y = -(truth.a() * x + truth.c() * z + truth.d()) / truth.b();
      pts.push_back(Vec3(x, y, z));
    }
    const GroundPlane clean = fit_plane_ransac(pts, RansacParams{});
    // Outlier displaced along the normal by > 10x the inlier threshold.
    pts.push_back(pts[0] + truth.normal() * 0.9);
    const GroundPlane spiked = fit_plane_ransac(pts, RansacParams{});
    CHECK(max_coeff_delta(clean, spiked) < 1e-9);
  }
}

TEST_CASE("pattern lifted from a rendered depth raster recovers the plane") {
  const DepthScale scale{0.13};
  const RoadSamplePattern pattern = RoadSamplePattern::grid(1280, 800);

  for (const GroundPlane& truth :
       {ref_plane(), canonicalize_plane(Vec4(0.01, 1.0, -0.02, -1.55))}) {
    const DepthRaster depth = render_plane_depth(truth, 1280, 800, 0.13);
    const auto pts = lift_road_points(
        {pattern.points.begin(), pattern.points.end()}, depth, scale,
        ref_camera());
    REQUIRE(pts.size() == 9);
    const GroundPlane fit = fit_plane_ransac(pts, RansacParams{});
    CHECK(max_coeff_delta(fit, truth) < 1e-6);
  }
}

TEST_CASE("gate accepts agreeing candidates and rejects deviations") {
  const PlaneState init(ref_plane());
  const GateThresholds th;

  SUBCASE("identical candidate is accepted") {
    const PlaneState next = gate_update(ref_plane(), init, th);
    CHECK(next.updated_flag);
    CHECK(next.current.coeffs() == ref_plane().coeffs());
    CHECK(next.previous.coeffs() == next.current.coeffs());
  }
  SUBCASE("2 degree normal tilt exceeds the initial-deviation bound") {
    const double t = deg2rad(2.0);
    const GroundPlane cand(Vec3(0.0, std::cos(t), std::sin(t)), -1.5);
    CHECK((cand.normal() - ref_plane().normal()).norm() ==
          doctest::Approx(2.0 * std::sin(deg2rad(1.0))));
    const PlaneState next = gate_update(cand, init, th);
    CHECK_FALSE(next.updated_flag);
    CHECK(next.current.coeffs() == init.previous.coeffs());
  }
  SUBCASE("1 percent offset change stays inside the bound") {
    const GroundPlane cand(Vec3(0, 1, 0), -1.515);
    const PlaneState next = gate_update(cand, init, th);
    CHECK(next.updated_flag);
    CHECK(next.current.d() == doctest::Approx(-1.515));
  }
  SUBCASE("3 percent offset change is rejected") {
    const GroundPlane cand(Vec3(0, 1, 0), -1.545);
    const PlaneState next = gate_update(cand, init, th);
    CHECK_FALSE(next.updated_flag);
    CHECK(next.current.coeffs() == init.current.coeffs());
  }
}

TEST_CASE("gate compares normals against the previous accepted plane") {
  const PlaneState init(ref_plane());
  const GateThresholds th;

  const GroundPlane a = canonicalize_plane(Vec4(0.003, 1.0, 0.0, -1.5));
  PlaneState state = gate_update(a, init, th);
  REQUIRE(state.updated_flag);

  // Still within theta0 of the initial plane, but 0.006 from the last
  // accepted normal, beyond theta1 = 0.004.
  const GroundPlane b = canonicalize_plane(Vec4(-0.003, 1.0, 0.0, -1.5));
  CHECK((b.normal() - init.initial.normal()).norm() < th.theta0);
  CHECK((b.normal() - a.normal()).norm() > th.theta1);
  const PlaneState next = gate_update(b, state, th);
  CHECK_FALSE(next.updated_flag);
  CHECK(next.current.coeffs() == a.coeffs());
}

TEST_CASE("gate requires a usable initial offset") {
  const PlaneState bad(GroundPlane(Vec3(0, 1, 0), 0.0));
  CHECK_THROWS_AS(gate_update(ref_plane(), bad, GateThresholds{}),
                  ZeroInitialOffset);
}

TEST_CASE("hold streak can force a re-anchor when enabled") {
  const PlaneState init(ref_plane());
  const GateThresholds th;
  const GroundPlane far_cand(Vec3(0, 1, 0), -1.8);  // 20% offset change

  PlaneState s = gate_update(far_cand, init, th, 2);
  CHECK_FALSE(s.updated_flag);
  CHECK(s.hold_streak == 1);
  s = gate_update(far_cand, s, th, 2);
  CHECK_FALSE(s.updated_flag);
  CHECK(s.hold_streak == 2);
  s = gate_update(far_cand, s, th, 2);
  CHECK(s.updated_flag);  // re-anchored
  CHECK(s.current.d() == doctest::Approx(-1.8));
  CHECK(s.hold_streak == 0);

  // Disabled by default: the same sequence never re-anchors.
  PlaneState h = gate_update(far_cand, init, th);
  for (int i = 0; i < 5; ++i) h = gate_update(far_cand, h, th);
  CHECK_FALSE(h.updated_flag);
  CHECK(h.current.coeffs() == init.current.coeffs());
}
