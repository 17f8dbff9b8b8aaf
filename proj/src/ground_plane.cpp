#include "sst/ground_plane.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <cmath>
#include <random>

namespace sst {

RoadSamplePattern RoadSamplePattern::grid(int image_w, int image_h,
                                          const std::array<double, 3>& row_fracs,
                                          const std::array<double, 3>& col_fracs) {
  RoadSamplePattern pattern;
  int i = 0;
  for (double rf : row_fracs) {
    for (double cf : col_fracs) {
      pattern.points[i++] = Pixel(cf * image_w, rf * image_h);
    }
  }
  pattern.validate(image_w, image_h);
  return pattern;
}

void RoadSamplePattern::validate(int image_w, int image_h) const {
  for (const Pixel& p : points) {
    if (!(p.x() >= 0.0) || !(p.x() <= image_w - 1) || !(p.y() >= 0.0) ||
        !(p.y() <= image_h - 1)) {
      throw InvalidArgument("road sample point outside the image");
    }
  }
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) {
        throw InvalidArgument("road sample points must be distinct");
      }
    }
  }
}

std::vector<Pixel> sample_road_points(const RoadSamplePattern& pattern,
                                      const std::vector<RectF>& footprints) {
  std::vector<Pixel> survivors;
  for (const Pixel& p : pattern.points) {
    bool masked = false;
    for (const RectF& r : footprints) {
      if (r.contains(p)) {
        masked = true;
        break;
      }
    }
    if (!masked) survivors.push_back(p);
  }
  if (survivors.size() < 3) {
    throw InsufficientRoadPoints("only " + std::to_string(survivors.size()) +
                                 " road points survive detection masking");
  }
  return survivors;
}

std::vector<Vec3> lift_road_points(const std::vector<Pixel>& pixels,
                                   const DepthRaster& depth,
                                   const DepthScale& scale,
                                   const CameraModel& cam) {
  std::vector<Vec3> points;
  points.reserve(pixels.size());
  for (const Pixel& px : pixels) {
    if (px.x() < 0.0 || px.x() > depth.width() - 1 || px.y() < 0.0 ||
        px.y() > depth.height() - 1) {
      continue;
    }
    const double raw = depth.sample(px.x(), px.y());
    if (!std::isfinite(raw)) continue;
    const double z = depth_to_distance(raw, scale);
    if (z <= kMinFrontDepth) continue;  // zero marks "no surface"
    const Vec3 pc(z * (px.x() - cam.cx) / cam.fx,
                  z * (px.y() - cam.cy) / cam.fy, z);
    points.push_back(cam.rotation.transpose() * (pc - cam.translation));
  }
  if (points.size() < 3) {
    throw NonFiniteDepth("only " + std::to_string(points.size()) +
                         " road points carry usable depth");
  }
  return points;
}

namespace {

struct TlsResult {
  Vec3 normal;
  double offset;
};

// Orthogonal-distance plane through the centroid; the normal is the
// scatter matrix's smallest eigenvector.
TlsResult tls_fit(const std::vector<Vec3>& points) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 scatter = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 q = p - centroid;
    scatter += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  const Vec3 evals = eig.eigenvalues();  // ascending
  if (evals[1] <= 1e-16 * std::max(evals[2], 1.0)) {
    throw DegenerateGeometry("plane fit points are collinear");
  }
  const Vec3 n = eig.eigenvectors().col(0);
  return {n, -n.dot(centroid)};
}

}  // namespace

GroundPlane fit_plane_tls(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw TooFewPoints();
  const TlsResult fit = tls_fit(points);
  return canonicalize_plane(
      Vec4(fit.normal.x(), fit.normal.y(), fit.normal.z(), fit.offset));
}

GroundPlane fit_plane_ransac(const std::vector<Vec3>& points,
                             const RansacParams& params,
                             int* consensus_size) {
  if (points.size() < 3) throw TooFewPoints();
  if (params.iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (!(params.inlier_threshold > 0.0)) {
    throw InvalidArgument("inlier threshold must be positive");
  }

  const size_t n = points.size();
  std::mt19937_64 engine(params.seed);
  const auto draw = [&]() { return engine() % n; };

  int best_count = -1;
  double best_sumsq = 0.0;
  std::vector<char> best_mask(n, 0);
  std::vector<char> mask(n, 0);

  for (int iter = 0; iter < params.iterations; ++iter) {
    const size_t i = draw();
    size_t j = draw();
    while (j == i) j = draw();
    size_t k = draw();
    while (k == i || k == j) k = draw();

    const Vec3 cross =
        (points[j] - points[i]).cross(points[k] - points[i]);
    if (cross.norm() < 1e-12) continue;  // collinear sample

    std::optional<GroundPlane> hypothesis;
    try {
      hypothesis = canonicalize_plane(
          Vec4(cross.x(), cross.y(), cross.z(), -cross.dot(points[i])));
    } catch (const Error&) {
      continue;  // near-vertical sample plane cannot be oriented
    }

    int count = 0;
    double sumsq = 0.0;
    for (size_t p = 0; p < n; ++p) {
      const double dist = hypothesis->signed_distance(points[p]);
      const bool inlier = std::abs(dist) <= params.inlier_threshold;
      mask[p] = inlier ? 1 : 0;
      if (inlier) {
        ++count;
        sumsq += dist * dist;
      }
    }
    // Strict improvement keeps the earliest iteration on full ties.
    if (count > best_count ||
        (count == best_count && sumsq < best_sumsq)) {
      best_count = count;
      best_sumsq = sumsq;
      best_mask = mask;
    }
  }
  if (best_count < 3) {
    throw DegenerateGeometry("no valid plane hypothesis found");
  }
  if (consensus_size != nullptr) *consensus_size = best_count;

  std::vector<Vec3> consensus;
  consensus.reserve(static_cast<size_t>(best_count));
  for (size_t p = 0; p < n; ++p) {
    if (best_mask[p]) consensus.push_back(points[p]);
  }
  return fit_plane_tls(consensus);
}

PlaneState gate_update(const GroundPlane& candidate, const PlaneState& state,
                       const GateThresholds& thresholds, int max_hold_frames) {
  if (std::abs(state.initial.d()) < 1e-6) throw ZeroInitialOffset();

  const double dev_init = (candidate.normal() - state.initial.normal()).norm();
  const double dev_prev = (candidate.normal() - state.previous.normal()).norm();
  const double dev_offset =
      std::abs(candidate.d() - state.initial.d()) / std::abs(state.initial.d());

  bool accept = dev_init < thresholds.theta0 && dev_prev < thresholds.theta1 &&
                dev_offset < thresholds.theta2;
  // Optional re-anchor after a long rejection streak; off by default.
  if (!accept && max_hold_frames > 0 && state.hold_streak >= max_hold_frames) {
    accept = true;
  }

  PlaneState next = state;
  if (accept) {
    next.current = candidate;
    next.updated_flag = true;
    next.hold_streak = 0;
  } else {
    next.current = state.previous;
    next.updated_flag = false;
    next.hold_streak = state.hold_streak + 1;
  }
  next.previous = next.current;
  return next;
}

}  // namespace sst
