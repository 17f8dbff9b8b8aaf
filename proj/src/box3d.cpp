#include "sst/box3d.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace sst {

namespace {

// Height of the box above B1: least-squares intersection of the viewing
// ray through the raised pixel with the vertical line B1 - t*n.  Exact
// when the top vertex lies on that line.
double recover_height(const Pixel& top_px, const Vec3& b1, const Vec3& n,
                      const CameraModel& cam) {
  const Vec3 r = pixel_ray(top_px, cam);
  const Vec3 o = cam.center();
  const Vec3 u = -n;  // unit: vertical line direction
  const Vec3 w = o - b1;
  const double a = r.dot(r);
  const double b = r.dot(u);
  const double c = 1.0;  // u.dot(u)
  const double d = r.dot(w);
  const double e = u.dot(w);
  const double denom = a * c - b * b;
  if (denom < 1e-12) {
    throw DegenerateGeometry("height ray parallel to the vertical axis");
  }
  const double t = (a * e - b * d) / denom;
  if (t <= 0.0) {
    throw DegenerateGeometry("recovered box height is not positive");
  }
  return t;
}

}  // namespace

Box3D reconstruct_box(const BoxDetection& det, const CameraModel& cam,
                      const GroundPlane& plane) {
  const Vec3 B1 = backproject_to_plane(det.b1, cam, plane);
  const Vec3 B2 = backproject_to_plane(det.b2, cam, plane);
  const Vec3 B3 = backproject_to_plane(det.b3, cam, plane);

  const Vec3 p = B1 - B2;
  const Vec3 q = B3 - B2;
  if (p.norm() < 1e-9 || q.norm() < 1e-9 ||
      p.cross(q).norm() < 1e-9 * p.norm() * q.norm()) {
    throw NonConvexFootprint();
  }

  // Orthogonalize keeping B2: choose perpendicular in-plane directions
  // (u, w) maximizing the projections of p and q, which minimizes the
  // total squared displacement of B1 and B3.
  const Vec3 n = plane.normal();
  const Vec3 e1 = (p - n * n.dot(p)).normalized();
  const Vec3 e2 = n.cross(e1);
  const double p1 = p.dot(e1), p2 = p.dot(e2);
  const double q1 = q.dot(e1), q2 = q.dot(e2);
  const double phi = 0.5 * std::atan2(2.0 * (p1 * p2 - q1 * q2),
                                      p1 * p1 - p2 * p2 + q2 * q2 - q1 * q1);
  const Vec3 u = std::cos(phi) * e1 + std::sin(phi) * e2;
  const Vec3 w = -std::sin(phi) * e1 + std::cos(phi) * e2;
  const double pu = p.dot(u);
  const double qw = q.dot(w);
  if (std::abs(pu) < 1e-9 || std::abs(qw) < 1e-9) throw NonConvexFootprint();

  Box3D box;
  box.bottom[0] = B2 + pu * u;
  box.bottom[1] = B2;
  box.bottom[2] = B2 + qw * w;
  box.bottom[3] = box.bottom[0] + (box.bottom[2] - B2);

  box.height = recover_height(Pixel(det.b1.x(), det.b1.y() - det.h_px),
                              box.bottom[0], n, cam);
  for (int i = 0; i < 4; ++i) box.top[i] = box.bottom[i] - box.height * n;

  box.centroid = Vec3::Zero();
  for (int i = 0; i < 4; ++i) box.centroid += box.bottom[i] + box.top[i];
  box.centroid /= 8.0;

  const Vec3 edge = (box.bottom[1] - box.bottom[0]).normalized();
  const Vec3 heading = edge.cross(n);
  box.yaw = std::atan2(heading.x(), heading.z());
  return box;
}

std::array<VerticalFace, 2> visible_side_faces(const Box3D& box,
                                               const CameraModel& cam) {
  const Vec3 n = box_ground_normal(box);
  const Vec3 c = cam.center();

  std::array<VerticalFace, 4> faces;
  std::array<double, 4> score;
  bool inside = true;
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = box.bottom[i];
    const Vec3& b = box.bottom[(i + 1) % 4];
    VerticalFace f;
    f.corners = {a, b, box.top[(i + 1) % 4], box.top[i]};
    f.outward = n.cross(b - a).normalized();
    f.offset = -f.outward.dot(a);
    f.edge = i;
    const Vec3 center = 0.25 * (f.corners[0] + f.corners[1] + f.corners[2] +
                                f.corners[3]);
    score[i] = f.outward.dot((c - center).normalized());
    if (f.outward.dot(c) + f.offset >= 0.0) inside = false;
    faces[i] = f;
  }
  if (inside) throw CameraInsideFootprint();

  // Exact score ties resolve by fixed preference: near, left, right, far.
  const auto priority = [](int edge) {
    switch (edge) {
      case 0: return 0;
      case 3: return 1;
      case 1: return 2;
      default: return 3;
    }
  };
  std::array<int, 4> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    if (score[lhs] != score[rhs]) return score[lhs] > score[rhs];
    return priority(lhs) < priority(rhs);
  });
  return {faces[order[0]], faces[order[1]]};
}

namespace {

// Screen-space quad of a face's lower half, with convex membership test.
// Winding may be either orientation.
struct FaceQuad {
  std::array<Pixel, 4> quad;
  int xs = 0, xe = -1, ys = 0, ye = -1;

  bool contains(double px, double py) const {
    bool any_pos = false, any_neg = false;
    for (int i = 0; i < 4; ++i) {
      const Pixel& a = quad[i];
      const Pixel& b = quad[(i + 1) % 4];
      const double s =
          (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
      any_pos = any_pos || s > 0.0;
      any_neg = any_neg || s < 0.0;
    }
    return !(any_pos && any_neg);
  }
};

FaceQuad face_quad(const VerticalFace& f, const Vec3& lift,
                   const CameraModel& cam, int image_w, int image_h) {
  const std::array<Vec3, 4> quad3 = {f.corners[0], f.corners[1],
                                     f.corners[1] + lift, f.corners[0] + lift};
  FaceQuad q;
  for (int i = 0; i < 4; ++i) q.quad[i] = project(quad3[i], cam);

  double x0 = q.quad[0].x(), x1 = q.quad[0].x();
  double y0 = q.quad[0].y(), y1 = q.quad[0].y();
  for (const Pixel& pt : q.quad) {
    x0 = std::min(x0, pt.x());
    x1 = std::max(x1, pt.x());
    y0 = std::min(y0, pt.y());
    y1 = std::max(y1, pt.y());
  }
  q.xs = std::max(0, static_cast<int>(std::ceil(x0)));
  q.xe = std::min(image_w - 1, static_cast<int>(std::floor(x1)));
  q.ys = std::max(0, static_cast<int>(std::ceil(y0)));
  q.ye = std::min(image_h - 1, static_cast<int>(std::floor(y1)));
  return q;
}

// Ray parameter of pixel ray vs face plane; negative when the plane is
// behind the camera or parallel to the ray.
double face_ray_param(int x, int y, const VerticalFace& f,
                      const CameraModel& cam) {
  const Vec3 dir((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
  const double denom = f.outward.dot(dir);
  if (std::abs(denom) < 1e-12) return -1.0;
  return -f.offset / denom;
}

}  // namespace

std::vector<FacePixel> lower_half_pixels(const Box3D& box,
                                         const std::array<VerticalFace, 2>& faces,
                                         const CameraModel& cam, int image_w,
                                         int image_h) {
  const Vec3 n = box_ground_normal(box);
  const Vec3 lift = -0.5 * box.height * n;
  const std::array<FaceQuad, 2> quads = {
      face_quad(faces[0], lift, cam, image_w, image_h),
      face_quad(faces[1], lift, cam, image_w, image_h)};

  const int xs = std::min(quads[0].xs, quads[1].xs);
  const int xe = std::max(quads[0].xe, quads[1].xe);
  const int ys = std::min(quads[0].ys, quads[1].ys);
  const int ye = std::max(quads[0].ye, quads[1].ye);

  std::vector<FacePixel> pixels;
  for (int y = ys; y <= ye; ++y) {
    for (int x = xs; x <= xe; ++x) {
      bool in[2];
      for (int fi = 0; fi < 2; ++fi) {
        const FaceQuad& q = quads[fi];
        in[fi] = x >= q.xs && x <= q.xe && y >= q.ys && y <= q.ye &&
                 q.contains(x, y);
      }
      if (!in[0] && !in[1]) continue;
      int fi;
      if (in[0] != in[1]) {
        fi = in[0] ? 0 : 1;
      } else {
        // Both screen quads claim the pixel (one face nearly edge-on).
        // The visible surface is the face plane the ray meets first.
        const double s0 = face_ray_param(x, y, faces[0], cam);
        const double s1 = face_ray_param(x, y, faces[1], cam);
        if (s0 <= 0.0 && s1 <= 0.0) continue;
        if (s0 <= 0.0)
          fi = 1;
        else if (s1 <= 0.0)
          fi = 0;
        else
          fi = s0 <= s1 ? 0 : 1;
      }
      pixels.push_back(FacePixel{x, y, fi});
    }
  }
  if (pixels.empty()) throw EmptyRegion();
  return pixels;
}

RectF detection_footprint(const BoxDetection& det, double dilation_px) {
  const std::array<Pixel, 3> bottoms = {det.b1, det.b2, det.b3};
  RectF r{det.b1.x(), det.b1.y() - det.h_px, det.b1.x(), det.b1.y()};
  for (const Pixel& b : bottoms) {
    r.x0 = std::min(r.x0, b.x());
    r.x1 = std::max(r.x1, b.x());
    r.y0 = std::min(r.y0, b.y() - det.h_px);
    r.y1 = std::max(r.y1, b.y());
  }
  return r.dilated(dilation_px);
}

}  // namespace sst
