#include "sst/geometry.hpp"

#include <cmath>

namespace sst {

CameraModel::CameraModel(double fx_, double fy_, double cx_, double cy_,
                         const Mat3& rot, const Vec3& trans)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), rotation(rot), translation(trans) {
  validate();
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("camera focal lengths must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidArgument("camera principal point must be finite");
  }
  const Mat3 residual = rotation.transpose() * rotation - Mat3::Identity();
  if (residual.cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidArgument("camera rotation is not orthonormal");
  }
}

GroundPlane::GroundPlane(const Vec3& unit_normal, double offset)
    : normal_(unit_normal), offset_(offset) {
  if (std::abs(normal_.squaredNorm() - 1.0) > 1e-12) {
    throw InvalidArgument("plane normal must be unit length");
  }
  if (!(normal_.y() > 0.0)) {
    throw InvalidArgument("canonical plane requires b > 0");
  }
  if (!std::isfinite(offset_)) {
    throw InvalidArgument("plane offset must be finite");
  }
}

GroundPlane canonicalize_plane(const Vec4& raw) {
  const double norm = raw.head<3>().norm();
  if (norm < 1e-12) throw ZeroNormal();
  Vec4 scaled = raw / norm;
  if (std::abs(scaled[1]) < kMinVerticalComponent) throw HorizontalNormal();
  if (scaled[1] < 0.0) scaled = -scaled;
  // Renormalize so the constructor's unit-length check holds exactly.
  const Vec3 n = scaled.head<3>().normalized();
  return GroundPlane(n, scaled[3]);
}

Pixel project(const Vec3& point, const CameraModel& cam) {
  const Vec3 pc = cam.rotation * point + cam.translation;
  if (pc.z() <= kMinFrontDepth) throw PointBehindCamera();
  return Pixel(cam.fx * pc.x() / pc.z() + cam.cx,
               cam.fy * pc.y() / pc.z() + cam.cy);
}

std::optional<Pixel> try_project(const Vec3& point, const CameraModel& cam) {
  const Vec3 pc = cam.rotation * point + cam.translation;
  if (pc.z() <= kMinFrontDepth) return std::nullopt;
  return Pixel(cam.fx * pc.x() / pc.z() + cam.cx,
               cam.fy * pc.y() / pc.z() + cam.cy);
}

Vec3 pixel_ray(const Pixel& px, const CameraModel& cam) {
  const Vec3 dir_cam((px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy,
                     1.0);
  return cam.rotation.transpose() * dir_cam;
}

namespace {

enum class HitStatus { kOk, kParallel, kBehind };

// Shared ray-plane kernel.  The ray parameter equals camera-frame depth
// because the camera-frame direction has z = 1.
HitStatus intersect(const Pixel& px, const CameraModel& cam, const Vec3& n,
                    double d, Vec3* out) {
  const Vec3 dir = pixel_ray(px, cam);
  const double denom = n.dot(dir);
  if (std::abs(denom) < kMinRayPlaneDot) return HitStatus::kParallel;
  const Vec3 origin = cam.center();
  const double s = -(d + n.dot(origin)) / denom;
  if (s <= 0.0) return HitStatus::kBehind;
  *out = origin + s * dir;
  return HitStatus::kOk;
}

}  // namespace

Vec3 backproject_to_plane(const Pixel& px, const CameraModel& cam,
                          const Vec3& unit_normal, double offset) {
  Vec3 hit;
  switch (intersect(px, cam, unit_normal, offset, &hit)) {
    case HitStatus::kOk:
      return hit;
    case HitStatus::kParallel:
      throw RayParallelToPlane();
    case HitStatus::kBehind:
      throw IntersectionBehindCamera();
  }
  throw Error("unreachable");
}

std::optional<Vec3> try_backproject_to_plane(const Pixel& px,
                                             const CameraModel& cam,
                                             const Vec3& unit_normal,
                                             double offset) {
  Vec3 hit;
  if (intersect(px, cam, unit_normal, offset, &hit) != HitStatus::kOk) {
    return std::nullopt;
  }
  return hit;
}

GroundPlane plane_through_point(const GroundPlane& base, const Vec3& point) {
  return GroundPlane(base.normal(), -base.normal().dot(point));
}

}  // namespace sst
