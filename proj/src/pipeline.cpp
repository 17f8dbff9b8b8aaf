#include "sst/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;

namespace sst {

namespace {

std::string raster_name(int frame_id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d.msr", frame_id);
  return buf;
}

}  // namespace

PixelRect SequenceConfig::roi() const {
  return ego_roi ? *ego_roi : default_ego_roi(width, height);
}

RoadSamplePattern SequenceConfig::road_pattern() const {
  return RoadSamplePattern::grid(width, height);
}

void SequenceConfig::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("image size must be positive");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  camera.validate();
  canonicalize_plane(initial_plane);
  if (!(depth_scale.meters_per_unit > 0.0)) {
    throw ConfigError("depth scale must be positive");
  }
  if (!(gates.theta0 > 0.0) || !(gates.theta1 > 0.0) || !(gates.theta2 > 0.0)) {
    throw ConfigError("gate thresholds must be positive");
  }
  if (ransac.iterations <= 0 || !(ransac.inlier_threshold > 0.0)) {
    throw ConfigError("invalid plane-fit parameters");
  }
  if (!(d0 >= 0.0)) throw ConfigError("d0 must be non-negative");
  if (max_hold_frames < 0) throw ConfigError("max_hold_frames must be >= 0");
  const PixelRect r = roi();
  if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > width ||
      r.y + r.h > height) {
    throw ConfigError("ego window must lie inside the image");
  }
  road_pattern().validate(width, height);
}

SequenceConfig load_sequence_config(const std::string& dir,
                                    const SequenceConfig& base) {
  const Calibration calib = read_calibration(dir + "/calib.txt");
  SequenceConfig config = base;
  config.camera = calib.camera;
  if (calib.plane) config.initial_plane = *calib.plane;
  if (calib.depth_scale) config.depth_scale.meters_per_unit = *calib.depth_scale;
  return config;
}

SequenceReader::SequenceReader(const std::string& dir,
                               const SequenceConfig& config)
    : dir_(dir), config_(load_sequence_config(dir, config)) {
  config_.validate();

  const fs::path depth_dir = fs::path(dir_) / "depth";
  if (!fs::is_directory(depth_dir)) {
    throw IoError("missing depth directory: " + depth_dir.string());
  }
  std::vector<int> ids;
  for (const auto& entry : fs::directory_iterator(depth_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() != 10 || name.substr(6) != ".msr") {
      throw IoError("unexpected raster name: " + entry.path().string());
    }
    ids.push_back(std::stoi(name.substr(0, 6)));
  }
  if (ids.empty()) throw IoError("no depth rasters in " + depth_dir.string());
  std::sort(ids.begin(), ids.end());
  n_frames_ = static_cast<int>(ids.size());
  for (int i = 0; i < n_frames_; ++i) {
    if (ids[i] != i) {
      throw NonContiguousFrameIds("depth rasters must be numbered 0.." +
                                  std::to_string(n_frames_ - 1));
    }
  }

  per_frame_dets_.resize(n_frames_);
  const fs::path det_path = fs::path(dir_) / "detections.csv";
  if (fs::exists(det_path)) {
    for (const BoxDetection& d : read_detections(det_path.string())) {
      if (d.frame_id < 0 || d.frame_id >= n_frames_) {
        throw IoError("detection frame " + std::to_string(d.frame_id) +
                      " outside sequence in " + det_path.string());
      }
      per_frame_dets_[d.frame_id].push_back(d);
    }
  }
}

FrameBundle SequenceReader::frame(int index) {
  if (index < 0 || index >= n_frames_) {
    throw InvalidArgument("frame index out of range");
  }
  FrameBundle bundle;
  bundle.frame_id = index;

  const std::string depth_path =
      (fs::path(dir_) / "depth" / raster_name(index)).string();
  bundle.depth = read_raster(depth_path);
  if (bundle.depth.width() != config_.width ||
      bundle.depth.height() != config_.height || bundle.depth.channels() != 1) {
    throw DimensionMismatch("depth raster does not match configured size: " +
                            depth_path);
  }

  const fs::path flow_path = fs::path(dir_) / "flow" / raster_name(index);
  if (fs::exists(flow_path)) {
    bundle.flow = read_raster(flow_path.string());
    if (bundle.flow->width() != config_.width ||
        bundle.flow->height() != config_.height || bundle.flow->channels() != 2) {
      throw DimensionMismatch("flow raster does not match configured size: " +
                              flow_path.string());
    }
  }
  bundle.detections = per_frame_dets_[index];
  return bundle;
}

StateReport run_sequence(FrameSource& source, const SequenceConfig& config) {
  config.validate();
  const GroundPlane initial = canonicalize_plane(config.initial_plane);
  PlaneState state(initial);
  const RoadSamplePattern pattern = config.road_pattern();
  const PixelRect roi = config.roi();
  const Vec3 cam_center = config.camera.center();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  StateReport report;
  const int n = source.size();
  for (int i = 0; i < n; ++i) {
    FrameBundle bundle = source.frame(i);

    bool updated = false;
    if (config.correction_enabled) {
      try {
        std::vector<RectF> footprints;
        footprints.reserve(bundle.detections.size());
        for (const BoxDetection& d : bundle.detections) {
          footprints.push_back(detection_footprint(d));
        }
        const std::vector<Pixel> probes =
            sample_road_points(pattern, footprints);
        const std::vector<Vec3> points = lift_road_points(
            probes, bundle.depth, config.depth_scale, config.camera);
        const GroundPlane candidate = fit_plane_ransac(points, config.ransac);
        state = gate_update(candidate, state, config.gates,
                            config.max_hold_frames);
        updated = state.updated_flag;
      } catch (const Error&) {
        // No usable candidate this frame: hold the running plane and
        // let the streak age exactly as a gate rejection would.
        state.previous = state.current;
        state.updated_flag = false;
        state.hold_streak += 1;
      }
    }
    report.plane.push_back({bundle.frame_id, state.current.coeffs(), updated});
    const GroundPlane& plane = state.current;

    struct Reconstructed {
      BoxDetection det;
      Box3D box;
    };
    std::vector<Reconstructed> boxes;
    for (const BoxDetection& d : bundle.detections) {
      try {
        boxes.push_back({d, reconstruct_box(d, config.camera, plane)});
      } catch (const Error&) {
        // Detection not representable on the current plane: no record.
      }
    }

    std::optional<EgoVelocity> ego;
    if (bundle.flow) {
      EgoRecord er;
      er.frame = bundle.frame_id;
      try {
        ego = ego_ground_velocity(*bundle.flow, roi, plane, config.camera,
                                  config.fps);
        er.vx_kmh = to_kmh(ego->lateral());
        er.vz_kmh = to_kmh(ego->longitudinal());
        er.confident = !ego->low_confidence();
      } catch (const Error&) {
        er.vx_kmh = nan;
        er.vz_kmh = nan;
        er.confident = false;
      }
      report.ego.push_back(er);
    }

    std::optional<Vec3> roi_center;
    for (const Reconstructed& rec : boxes) {
      VehicleRecord vr;
      vr.frame = bundle.frame_id;
      vr.vehicle_id = rec.det.vehicle_id;
      vr.position = box_bottom_center(rec.box);
      vr.yaw_deg = rad2deg(rec.box.yaw);
      if (bundle.flow && ego) {
        try {
          const auto faces = visible_side_faces(rec.box, config.camera);
          const auto pixels = lower_half_pixels(
              rec.box, faces, config.camera, config.width, config.height);
          const SurroundVelocity sv = surround_relative_velocity(
              *bundle.flow, rec.box, faces, pixels, plane, config.camera,
              config.fps);
          if (!roi_center) {
            roi_center = roi_ground_centroid(roi, plane, config.camera);
          }
          const LateralGeometry geom{
              config.d0, horizontal_distance(cam_center, *roi_center),
              horizontal_distance(cam_center, vr.position)};
          vr.vaz_kmh = to_kmh(absolute_longitudinal(sv.v_r.z(), *ego));
          vr.vax_kmh = to_kmh(absolute_lateral(
              sv.v_r.x(), lateral_ground_at_vehicle(ego->lateral(), geom)));
          vr.confident = !sv.low_confidence() && !ego->low_confidence();
        } catch (const Error&) {
          // Velocity unavailable; the pose columns stand alone.
        }
      }
      report.vehicles.push_back(vr);
    }
  }
  return report;
}

}  // namespace sst
