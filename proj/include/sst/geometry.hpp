#pragma once

#include <optional>

#include "sst/errors.hpp"
#include "sst/types.hpp"

namespace sst {

inline constexpr double kMinFrontDepth = 1e-6;      // z at/behind this is "behind camera"
inline constexpr double kMinRayPlaneDot = 1e-9;     // |n.dir| below this is "parallel"
inline constexpr double kMinVerticalComponent = 1e-6;

/// Pinhole camera with optional rigid extrinsics.  A world point X maps
/// to camera coordinates as Xc = rotation * X + translation; with the
/// defaults the world frame and camera frame coincide.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  CameraModel() = default;
  CameraModel(double fx_, double fy_, double cx_, double cy_,
              const Mat3& rot = Mat3::Identity(),
              const Vec3& trans = Vec3::Zero());

  /// Camera center expressed in world coordinates: -R^T t.
  Vec3 center() const { return -(rotation.transpose() * translation); }

  /// Throws InvalidArgument unless fx, fy > 0 and rotation is orthonormal
  /// to within 1e-9 per entry.
  void validate() const;
};

/// Plane a*x + b*y + c*z + d = 0 held in canonical form: (a, b, c) is a
/// unit vector and b > 0, so the normal points from the camera side
/// toward the ground.  Construct via canonicalize_plane for raw
/// coefficients; the constructor expects an already-canonical pair.
class GroundPlane {
 public:
  GroundPlane(const Vec3& unit_normal, double offset);

  const Vec3& normal() const { return normal_; }
  double offset() const { return offset_; }

  double a() const { return normal_.x(); }
  double b() const { return normal_.y(); }
  double c() const { return normal_.z(); }
  double d() const { return offset_; }

  Vec4 coeffs() const { return Vec4(normal_.x(), normal_.y(), normal_.z(), offset_); }

  /// Signed distance of a point from the plane; positive on the side the
  /// normal points toward.
  double signed_distance(const Vec3& p) const {
    return normal_.dot(p) + offset_;
  }

 private:
  Vec3 normal_;
  double offset_;
};

/// Normalizes raw plane coefficients (a, b, c, d) to canonical form.
/// Throws ZeroNormal when |(a,b,c)| < 1e-12 and HorizontalNormal when
/// the normalized vertical component |b| < 1e-6.
GroundPlane canonicalize_plane(const Vec4& raw);

/// Projects a world point into the image.  Throws PointBehindCamera when
/// the camera-frame depth is <= 1e-6.
Pixel project(const Vec3& point, const CameraModel& cam);

/// Non-throwing variant of project; empty on failure.
std::optional<Pixel> try_project(const Vec3& point, const CameraModel& cam);

/// Unit-free direction (in world coordinates) of the viewing ray through
/// a pixel.  Not normalized; camera-frame z component is 1.
Vec3 pixel_ray(const Pixel& px, const CameraModel& cam);

/// Intersects the viewing ray of a pixel with a plane given by a unit
/// normal and offset, returning the world point.  Throws
/// RayParallelToPlane when |normal . dir| < 1e-9 and
/// IntersectionBehindCamera when the hit has non-positive ray parameter.
Vec3 backproject_to_plane(const Pixel& px, const CameraModel& cam,
                          const Vec3& unit_normal, double offset);

inline Vec3 backproject_to_plane(const Pixel& px, const CameraModel& cam,
                                 const GroundPlane& plane) {
  return backproject_to_plane(px, cam, plane.normal(), plane.offset());
}

/// Non-throwing variant for per-pixel loops; empty on either failure.
std::optional<Vec3> try_backproject_to_plane(const Pixel& px,
                                             const CameraModel& cam,
                                             const Vec3& unit_normal,
                                             double offset);

inline std::optional<Vec3> try_backproject_to_plane(const Pixel& px,
                                                    const CameraModel& cam,
                                                    const GroundPlane& plane) {
  return try_backproject_to_plane(px, cam, plane.normal(), plane.offset());
}

/// Plane parallel to `base` passing through `point` (same normal, offset
/// recomputed).  Canonical form is preserved.
GroundPlane plane_through_point(const GroundPlane& base, const Vec3& point);

/// Distance between two points measured in the camera XZ plane.
inline double horizontal_distance(const Vec3& p, const Vec3& q) {
  const double dx = p.x() - q.x();
  const double dz = p.z() - q.z();
  return std::sqrt(dx * dx + dz * dz);
}

}  // namespace sst
