#pragma once

#include <array>
#include <vector>

#include "sst/geometry.hpp"

namespace sst {

/// One detector output: three bottom-vertex pixels of the 3D box plus
/// the image-space box height at b1.  b1 and b2 span the near edge left
/// to right as seen in the image; b3 is the far corner adjacent to b2.
struct BoxDetection {
  int frame_id = 0;
  int vehicle_id = 0;
  Pixel b1 = Pixel::Zero();
  Pixel b2 = Pixel::Zero();
  Pixel b3 = Pixel::Zero();
  double h_px = 0.0;
};

/// Reconstructed vehicle cuboid resting on the ground plane.  Bottom
/// vertices run B1, B2, B3, B4 around the footprint (B4 completes the
/// rectangle); top vertices sit height meters along the plane's upward
/// direction.  Yaw is in (-pi, pi], 0 facing +Z, positive toward +X.
struct Box3D {
  std::array<Vec3, 4> bottom;
  std::array<Vec3, 4> top;
  double height = 0.0;
  Vec3 centroid = Vec3::Zero();
  double yaw = 0.0;
};

/// Downward unit normal of the plane the box rests on.
inline Vec3 box_ground_normal(const Box3D& box) {
  return (box.bottom[0] - box.top[0]) / box.height;
}

inline Vec3 box_bottom_center(const Box3D& box) {
  return 0.25 * (box.bottom[0] + box.bottom[1] + box.bottom[2] + box.bottom[3]);
}

/// One vertical box face: corners ordered bottom-a, bottom-b, top-b,
/// top-a; `outward` is the horizontal unit normal pointing away from the
/// box interior, and the face plane is outward . X + offset = 0.
/// `edge` indexes the bottom edge (0 near, 1 right, 2 far, 3 left).
struct VerticalFace {
  std::array<Vec3, 4> corners;
  Vec3 outward = Vec3::Zero();
  double offset = 0.0;
  int edge = 0;
};

/// Pixel assigned to one of the two visible faces (index into the pair
/// returned by visible_side_faces).
struct FacePixel {
  int x = 0;
  int y = 0;
  int face = 0;
};

/// Lifts the three bottom pixels onto the plane, completes and
/// orthogonalizes the footprint rectangle (B2 stays fixed; B1 and B3
/// move the minimal squared distance onto perpendicular directions),
/// recovers metric height from h_px, and derives yaw from the near
/// edge.  Throws NonConvexFootprint for collinear vertices and
/// propagates back-projection errors.
Box3D reconstruct_box(const BoxDetection& det, const CameraModel& cam,
                      const GroundPlane& plane);

/// The two vertical faces whose outward normals score highest against
/// the direction to the camera (the faces a camera can see absent
/// occlusion), ordered by descending score; exact ties prefer the near,
/// then left, then right, then far face.  Throws CameraInsideFootprint.
std::array<VerticalFace, 2> visible_side_faces(const Box3D& box,
                                               const CameraModel& cam);

/// Integer pixels covered by the lower half of each visible face,
/// tagged with the face they belong to.  Pixels outside the image are
/// dropped; throws EmptyRegion when none survive and propagates
/// projection errors for corners behind the camera.
std::vector<FacePixel> lower_half_pixels(const Box3D& box,
                                         const std::array<VerticalFace, 2>& faces,
                                         const CameraModel& cam, int image_w,
                                         int image_h);

/// Image-space axis-aligned cover of the detected box (bottom vertices
/// plus their h_px-raised counterparts), dilated on every side.
RectF detection_footprint(const BoxDetection& det, double dilation_px = 5.0);

}  // namespace sst
