#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "sst/box3d.hpp"
#include "sst/geometry.hpp"
#include "sst/raster.hpp"

namespace sst {

/// Rectangular ground patch in front of the ego vehicle used for ego
/// velocity.  Default: 320x30, centered horizontally, bottom edge 20 px
/// above the image bottom.
using EgoRoi = PixelRect;

PixelRect default_ego_roi(int image_w, int image_h);

/// Ground-flow velocity in the camera frame.  v_g holds fps times the
/// mean lifted flow displacement; the ego moves opposite to the ground
/// flow, so the ego components negate it.
struct EgoVelocity {
  Vec3 v_g = Vec3::Zero();
  int n_pixels_used = 0;
  int n_pixels_skipped = 0;

  double longitudinal() const { return -v_g.z(); }
  double lateral() const { return -v_g.x(); }
  // Plane-normal component; diagnostic only, near 0 on valid frames.
  double vertical() const { return v_g.y(); }
  bool low_confidence() const { return n_pixels_skipped > n_pixels_used; }
};

/// Relative velocity of one surrounding vehicle, plus the absolute
/// components once the pipeline combines them with the ego estimate.
struct SurroundVelocity {
  Vec3 v_r = Vec3::Zero();
  double v_a_longitudinal = std::numeric_limits<double>::quiet_NaN();
  double v_a_lateral = std::numeric_limits<double>::quiet_NaN();
  int m_pixels_used = 0;
  int m_pixels_skipped = 0;

  bool low_confidence() const { return m_pixels_skipped > m_pixels_used; }
};

/// Distances feeding the lateral similarity scaling: d0 from the ego
/// rotation center to the camera, d_g from the camera to the ego ground
/// patch, d_s from the camera to the vehicle's bottom-face center.
struct LateralGeometry {
  double d0 = 2.0;
  double d_g = 0.0;
  double d_s = 0.0;
};

/// Difference of the two ray-plane intersections of px+flow and px on
/// the SAME plane: the in-plane displacement one frame of flow implies.
/// Propagates back-projection errors.
Vec3 lift_flow(const Pixel& px, const Vec2& flow, const GroundPlane& plane,
               const CameraModel& cam);

/// Non-throwing variant; empty when either endpoint fails to lift or the
/// flow is not finite.
std::optional<Vec3> try_lift_flow(const Pixel& px, const Vec2& flow,
                                  const GroundPlane& plane,
                                  const CameraModel& cam);

/// fps times the mean lifted flow over the ROI's pixels.  Pixels whose
/// lift fails are skipped and counted.  Throws EmptyRoi when nothing
/// lifts and InvalidArgument for an ROI outside the raster.
/// trim_fraction in [0, 0.5) optionally drops that fraction of extreme
/// contributions per component (half at each end) before averaging.
EgoVelocity ego_ground_velocity(const FlowRaster& flow, const PixelRect& roi,
                                const GroundPlane& plane,
                                const CameraModel& cam, double fps,
                                double trim_fraction = 0.0);

/// Centroid of the ROI pixels back-projected onto the ground plane.
/// Throws EmptyRoi when no pixel lifts.
Vec3 roi_ground_centroid(const PixelRect& roi, const GroundPlane& plane,
                         const CameraModel& cam);

/// fps times the mean of per-pixel lifted flows, each lifted onto the
/// ground-parallel plane through the pixel's anchor on its assigned
/// vertical face.  Throws EmptyRegion for an empty pixel set and
/// AllPixelsDegenerate when every lift fails.
SurroundVelocity surround_relative_velocity(
    const FlowRaster& flow, const Box3D& box,
    const std::array<VerticalFace, 2>& faces,
    const std::vector<FacePixel>& pixels, const GroundPlane& plane,
    const CameraModel& cam, double fps, double trim_fraction = 0.0);

/// Absolute longitudinal speed: relative plus ego longitudinal.
/// Positive = moving away from the ego in +Z.
inline double absolute_longitudinal(double v_r_z, const EgoVelocity& ego) {
  return v_r_z + ego.longitudinal();
}

/// Similarity scaling of a lateral ground speed from the ego patch range
/// to the vehicle range: factor (d0 + d_s) / (d0 + d_g).  Throws
/// DegenerateGeometry when d0 + d_g <= 1e-6.
double lateral_ground_at_vehicle(double lateral_mps,
                                 const LateralGeometry& geom);

/// Absolute lateral speed: relative plus the range-scaled ego lateral.
inline double absolute_lateral(double v_r_x, double ego_lateral_at_vehicle) {
  return v_r_x + ego_lateral_at_vehicle;
}

}  // namespace sst
