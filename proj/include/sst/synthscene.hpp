#pragma once

#include <string>
#include <vector>

#include "sst/pipeline.hpp"

// Analytic scene generator: a scripted camera drives over a ground
// plane among rigid cuboid vehicles, and every raster, detection, and
// truth row is computed in closed form. The world frame is the camera
// frame of frame 0; pitch perturbation swings the camera against the
// fixed world plane, which is equivalent to the road tilting under a
// fixed camera and keeps emitted calibration free of per-frame poses.

namespace sst {

struct VehicleSpec {
  int id = 1;
  double width = 1.8;   // meters, across the heading
  double length = 4.0;  // along the heading
  double height = 1.5;
  double x0 = 0.0;      // world bottom-center at frame 0
  double z0 = 15.0;
  double yaw0_deg = 0.0;
  double v_lat = 0.0;  // m/s in the vehicle frame, +X of its heading
  double v_fwd = 0.0;  // m/s along the heading
};

struct NoiseSpec {
  double depth_sigma = 0.0;  // raster units, surface pixels only
  double flow_sigma = 0.0;   // pixels, each channel
  double det_sigma = 0.0;    // pixels, bottom vertices only
  uint64_t seed = 0;
};

struct SceneSpec {
  int frames = 30;
  double fps = 30.0;
  int width = 1280;
  int height = 800;
  CameraModel camera{1000.0, 1000.0, 640.0, 400.0};
  Vec4 base_plane{0.0, 1.0, 0.0, -1.5};
  double pitch_amp_deg = 0.0;
  int pitch_period_frames = 60;
  double depth_scale = 0.13;
  double ego_forward = 0.0;   // m/s
  double ego_lateral = 0.0;   // m/s
  double ego_yaw_rate_dps = 0.0;
  double d0 = 2.0;  // camera sits d0 ahead of the turning reference
  std::vector<VehicleSpec> vehicles;
  NoiseSpec noise;

  void validate() const;
};

// INI-style text: [scene]/[camera]/[plane]/[ego] sections plus one
// [vehicle] section per vehicle; see the file-format documentation.
SceneSpec parse_scene_spec_text(const std::string& text,
                                const std::string& origin);
SceneSpec parse_scene_spec(const std::string& path);

struct EgoPose {
  Vec3 camera = Vec3::Zero();  // world position
  Mat3 rotation = Mat3::Identity();  // camera-to-world
  double yaw = 0.0;
  double pitch = 0.0;
};

class SceneRenderer {
 public:
  explicit SceneRenderer(const SceneSpec& spec);

  const SceneSpec& spec() const { return spec_; }
  int frames() const { return spec_.frames; }

  const EgoPose& pose(int t) const;
  // The world plane expressed in frame t's camera coordinates.
  GroundPlane camera_plane(int t) const;
  Vec3 vehicle_center(const VehicleSpec& v, int t) const;  // world

  DepthRaster render_depth(int t) const;
  FlowRaster render_flow(int t) const;  // needs t + 1 < frames
  std::vector<BoxDetection> render_detections(int t) const;

  // Noiseless bundle; flow absent on the last frame.
  FrameBundle bundle(int t) const;
  SequenceTruth truth() const;

 private:
  SceneSpec spec_;
  GroundPlane world_plane_;
  std::vector<EgoPose> poses_;
};

// Renders frames on demand, applying the scene's noise model; the
// in-memory twin of an emitted directory.
class SynthSource : public FrameSource {
 public:
  explicit SynthSource(const SceneSpec& spec) : renderer_(spec) {}

  int size() const override { return renderer_.frames(); }
  FrameBundle frame(int index) override;

  const SceneRenderer& renderer() const { return renderer_; }
  SequenceConfig config(const SequenceConfig& base = {}) const;

 private:
  SceneRenderer renderer_;
};

// Writes the full sequence directory (calib.txt, rasters with noise
// applied, detections.csv, noiseless truth/). Re-emitting the same spec
// produces a byte-identical tree.
void emit_sequence(const SceneSpec& spec, const std::string& out_dir);

}  // namespace sst
