#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sst/geometry.hpp"
#include "sst/raster.hpp"

namespace sst {

/// Scales normalized raster depth to metric planar depth:
/// z = value * meters_per_unit.
struct DepthScale {
  double meters_per_unit = 0.13;
};

inline double depth_to_distance(double depth_value, const DepthScale& scale) {
  return depth_value * scale.meters_per_unit;
}

/// Nine fixed road-probe pixels in the lower image.  The default grid
/// puts rows at {0.78, 0.86, 0.94} of the image height and columns at
/// {0.35, 0.50, 0.65} of the width.
struct RoadSamplePattern {
  std::array<Pixel, 9> points;

  static RoadSamplePattern grid(int image_w, int image_h,
                                const std::array<double, 3>& row_fracs =
                                    {0.78, 0.86, 0.94},
                                const std::array<double, 3>& col_fracs =
                                    {0.35, 0.50, 0.65});

  /// Throws InvalidArgument unless all points are inside the image and
  /// pairwise distinct.
  void validate(int image_w, int image_h) const;
};

/// Acceptance bounds for a freshly fitted plane: normal deviation from
/// the initial plane (theta0) and from the previous plane (theta1), and
/// relative offset deviation from the initial plane (theta2).
struct GateThresholds {
  double theta0 = 0.025;
  double theta1 = 0.004;
  double theta2 = 0.02;
};

struct RansacParams {
  int iterations = 100;
  double inlier_threshold = 0.05;  // meters point-plane distance
  uint64_t seed = 0;
};

/// Plane bookkeeping across frames.  `initial` is the calibration-time
/// plane and stays fixed; `previous` and `current` track the last
/// accepted estimate.  `hold_streak` counts consecutive rejected frames.
struct PlaneState {
  GroundPlane initial;
  GroundPlane previous;
  GroundPlane current;
  bool updated_flag = false;
  int hold_streak = 0;

  explicit PlaneState(const GroundPlane& init)
      : initial(init), previous(init), current(init) {}
};

/// Pattern pixels that fall inside no detection footprint.  Throws
/// InsufficientRoadPoints when fewer than 3 survive.
std::vector<Pixel> sample_road_points(const RoadSamplePattern& pattern,
                                      const std::vector<RectF>& footprints);

/// Lifts probe pixels into 3D through the depth raster: each point sits
/// on its viewing ray at planar depth z = depth_to_distance(sample).
/// Depth is sampled bilinearly.  Non-finite or non-positive samples drop
/// the point; throws NonFiniteDepth when fewer than 3 points remain.
std::vector<Vec3> lift_road_points(const std::vector<Pixel>& pixels,
                                   const DepthRaster& depth,
                                   const DepthScale& scale,
                                   const CameraModel& cam);

/// Direct total-least-squares plane fit (orthogonal distance).  Throws
/// TooFewPoints (< 3) and DegenerateGeometry (collinear input).
GroundPlane fit_plane_tls(const std::vector<Vec3>& points);

/// Seeded RANSAC plane fit: `iterations` minimal 3-point hypotheses,
/// scored by inlier count at `inlier_threshold`, ties broken by lower
/// summed squared inlier residual and then earlier iteration.  The best
/// consensus set is refit by total least squares.  A non-null
/// `consensus_size` receives the winning consensus count (the quantity
/// the search maximized); the refit plane may regrade borderline points.
GroundPlane fit_plane_ransac(const std::vector<Vec3>& points,
                             const RansacParams& params,
                             int* consensus_size = nullptr);

/// Applies the update gate: the candidate replaces the current plane
/// only when all three deviation bounds hold; otherwise the previous
/// plane is held.  `previous` is then advanced for the next frame.
/// When max_hold_frames > 0 and that many consecutive frames have been
/// rejected, the next candidate is force-accepted as the new anchor.
/// Throws ZeroInitialOffset when |initial d| < 1e-6.
PlaneState gate_update(const GroundPlane& candidate, const PlaneState& state,
                       const GateThresholds& thresholds,
                       int max_hold_frames = 0);

}  // namespace sst
