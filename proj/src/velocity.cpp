#include "sst/velocity.hpp"

#include <algorithm>
#include <cmath>

namespace sst {

namespace {

void check_roi(const PixelRect& roi, const Raster& raster) {
  if (roi.w <= 0 || roi.h <= 0 || roi.x < 0 || roi.y < 0 ||
      roi.x + roi.w > raster.width() || roi.y + roi.h > raster.height()) {
    throw InvalidArgument("flow window must lie inside the raster");
  }
}

// Mean of contributions; with trimming, each component independently
// drops trim_fraction of its extremes, half per tail.
Vec3 aggregate(const std::vector<Vec3>& contributions, double trim_fraction) {
  const size_t n = contributions.size();
  if (trim_fraction <= 0.0) {
    Vec3 sum = Vec3::Zero();
    for (const Vec3& c : contributions) sum += c;
    return sum / static_cast<double>(n);
  }
  const size_t cut = static_cast<size_t>(trim_fraction * 0.5 * n);
  Vec3 mean = Vec3::Zero();
  std::vector<double> axis(n);
  for (int k = 0; k < 3; ++k) {
    for (size_t i = 0; i < n; ++i) axis[i] = contributions[i][k];
    std::sort(axis.begin(), axis.end());
    double sum = 0.0;
    for (size_t i = cut; i < n - cut; ++i) sum += axis[i];
    mean[k] = sum / static_cast<double>(n - 2 * cut);
  }
  return mean;
}

void check_trim(double trim_fraction) {
  if (trim_fraction < 0.0 || trim_fraction >= 0.5) {
    throw InvalidArgument("trim fraction must be in [0, 0.5)");
  }
}

}  // namespace

PixelRect default_ego_roi(int image_w, int image_h) {
  return PixelRect{(image_w - 320) / 2, image_h - 20 - 30, 320, 30};
}

Vec3 lift_flow(const Pixel& px, const Vec2& flow, const GroundPlane& plane,
               const CameraModel& cam) {
  const Vec3 from = backproject_to_plane(px, cam, plane);
  const Vec3 to = backproject_to_plane(px + flow, cam, plane);
  return to - from;
}

std::optional<Vec3> try_lift_flow(const Pixel& px, const Vec2& flow,
                                  const GroundPlane& plane,
                                  const CameraModel& cam) {
  if (!flow.allFinite()) return std::nullopt;
  const auto from = try_backproject_to_plane(px, cam, plane);
  if (!from) return std::nullopt;
  const auto to = try_backproject_to_plane(px + flow, cam, plane);
  if (!to) return std::nullopt;
  return *to - *from;
}

EgoVelocity ego_ground_velocity(const FlowRaster& flow, const PixelRect& roi,
                                const GroundPlane& plane,
                                const CameraModel& cam, double fps,
                                double trim_fraction) {
  check_roi(roi, flow);
  check_trim(trim_fraction);
  if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");

  std::vector<Vec3> contributions;
  contributions.reserve(static_cast<size_t>(roi.w) * roi.h);
  int skipped = 0;
  for (int y = roi.y; y < roi.y + roi.h; ++y) {
    for (int x = roi.x; x < roi.x + roi.w; ++x) {
      const Vec2 f(flow.at(x, y, 0), flow.at(x, y, 1));
      const auto lift = try_lift_flow(Pixel(x, y), f, plane, cam);
      if (lift) {
        contributions.push_back(*lift);
      } else {
        ++skipped;
      }
    }
  }
  if (contributions.empty()) throw EmptyRoi();

  EgoVelocity ego;
  ego.v_g = fps * aggregate(contributions, trim_fraction);
  ego.n_pixels_used = static_cast<int>(contributions.size());
  ego.n_pixels_skipped = skipped;
  return ego;
}

Vec3 roi_ground_centroid(const PixelRect& roi, const GroundPlane& plane,
                         const CameraModel& cam) {
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (int y = roi.y; y < roi.y + roi.h; ++y) {
    for (int x = roi.x; x < roi.x + roi.w; ++x) {
      const auto pt = try_backproject_to_plane(Pixel(x, y), cam, plane);
      if (pt) {
        sum += *pt;
        ++count;
      }
    }
  }
  if (count == 0) throw EmptyRoi("no window pixel reaches the ground plane");
  return sum / static_cast<double>(count);
}

SurroundVelocity surround_relative_velocity(
    const FlowRaster& flow, const Box3D& box,
    const std::array<VerticalFace, 2>& faces,
    const std::vector<FacePixel>& pixels, const GroundPlane& plane,
    const CameraModel& cam, double fps, double trim_fraction) {
  (void)box;
  check_trim(trim_fraction);
  if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");
  if (pixels.empty()) throw EmptyRegion();

  std::vector<Vec3> contributions;
  contributions.reserve(pixels.size());
  int skipped = 0;
  for (const FacePixel& fp : pixels) {
    if (!flow.contains(fp.x, fp.y)) {
      ++skipped;
      continue;
    }
    const Pixel px(fp.x, fp.y);
    const Vec2 f(flow.at(fp.x, fp.y, 0), flow.at(fp.x, fp.y, 1));
    if (!f.allFinite()) {
      ++skipped;
      continue;
    }
    const VerticalFace& face = faces[fp.face];
    const auto anchor =
        try_backproject_to_plane(px, cam, face.outward, face.offset);
    if (!anchor) {
      ++skipped;
      continue;
    }
    const GroundPlane lifted = plane_through_point(plane, *anchor);
    const auto lift = try_lift_flow(px, f, lifted, cam);
    if (!lift) {
      ++skipped;
      continue;
    }
    contributions.push_back(*lift);
  }
  if (contributions.empty()) throw AllPixelsDegenerate();

  SurroundVelocity sv;
  sv.v_r = fps * aggregate(contributions, trim_fraction);
  sv.m_pixels_used = static_cast<int>(contributions.size());
  sv.m_pixels_skipped = skipped;
  return sv;
}

double lateral_ground_at_vehicle(double lateral_mps,
                                 const LateralGeometry& geom) {
  const double denom = geom.d0 + geom.d_g;
  if (denom <= 1e-6) {
    throw DegenerateGeometry("lateral scaling denominator vanishes");
  }
  return (geom.d0 + geom.d_s) / denom * lateral_mps;
}

}  // namespace sst
