#pragma once

#include <Eigen/Core>

// Shared scalar/vector conventions for the surround-state library.
//
// Camera frame: X right, Y down, Z forward (optical axis).  Pixel
// coordinates (u, v) have u along image columns and v along rows,
// origin at the top-left corner.  Ground-parallel quantities live in
// the camera XZ plane; "lateral" is X, "longitudinal" is Z.

namespace sst {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

// A pixel location (u, v) in image coordinates.
using Pixel = Vec2;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Velocities are estimated in m/s and reported in km/h.
inline double to_kmh(double mps) { return mps * 3.6; }
inline double to_mps(double kmh) { return kmh / 3.6; }

// Axis-aligned pixel rectangle with inclusive-exclusive integer bounds,
// used for the ego flow window.
struct PixelRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
};

// Floating-point rectangle [x0, x1] x [y0, y1], used for detection
// footprints in image space.
struct RectF {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(const Pixel& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }

  RectF dilated(double margin) const {
    return {x0 - margin, y0 - margin, x1 + margin, y1 + margin};
  }
};

}  // namespace sst
