#include "sst/synthscene.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace sst {

namespace {

constexpr double kRayEps = 1e-9;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Mat3 yaw_rotation(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 pitch_rotation(double delta) {
  const double c = std::cos(delta), s = std::sin(delta);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent deterministic stream per (seed, frame, data kind).
std::mt19937_64 noise_rng(uint64_t seed, int frame, int kind) {
  return std::mt19937_64(
      mix64(seed ^ mix64(static_cast<uint64_t>(frame) * 4ull +
                         static_cast<uint64_t>(kind) + 1ull)));
}

// In-plane heading and right axis for a vehicle on `plane`.
struct VehicleBasis {
  Vec3 heading;
  Vec3 right;
};

VehicleBasis vehicle_basis(const VehicleSpec& v, const Vec3& n) {
  const double yaw = deg2rad(v.yaw0_deg);
  const Vec3 raw(std::sin(yaw), 0.0, std::cos(yaw));
  VehicleBasis b;
  b.heading = (raw - n * n.dot(raw)).normalized();
  b.right = n.cross(b.heading);
  return b;
}

Pixel project_camera(const Vec3& pc, const CameraModel& cam) {
  return Pixel(cam.fx * pc.x() / pc.z() + cam.cx,
               cam.fy * pc.y() / pc.z() + cam.cy);
}

}  // namespace

void SceneSpec::validate() const {
  if (frames < 1) throw ConfigError("scene needs at least one frame");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("image size must be positive");
  camera.validate();
  canonicalize_plane(base_plane);
  if (!(depth_scale > 0.0)) throw ConfigError("depth scale must be positive");
  if (pitch_period_frames < 1) {
    throw ConfigError("pitch period must be at least one frame");
  }
  if (!(d0 >= 0.0)) throw ConfigError("d0 must be non-negative");
  std::set<int> ids;
  for (const VehicleSpec& v : vehicles) {
    if (!(v.width > 0.0) || !(v.length > 0.0) || !(v.height > 0.0)) {
      throw ConfigError("vehicle dimensions must be positive");
    }
    if (!ids.insert(v.id).second) {
      throw ConfigError("duplicate vehicle id " + std::to_string(v.id));
    }
  }
}

SceneSpec parse_scene_spec_text(const std::string& text,
                                const std::string& origin) {
  SceneSpec spec;
  spec.vehicles.clear();
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  const auto fail = [&](const std::string& what) -> void {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section == "vehicle") {
        spec.vehicles.emplace_back();
      } else if (section != "scene" && section != "camera" &&
                 section != "plane" && section != "ego") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected 'key = values'");
    const std::string key = trim(t.substr(0, eq));
    std::vector<double> vals;
    {
      std::istringstream vs(t.substr(eq + 1));
      double v;
      while (vs >> v) vals.push_back(v);
      std::string rest;
      if (vs.clear(), vs >> rest) fail("bad value for '" + key + "'");
    }
    const auto want = [&](size_t n) -> void {
      if (vals.size() != n) {
        fail("'" + key + "' takes " + std::to_string(n) + " value(s)");
      }
    };
    const auto one = [&]() {
      want(1);
      return vals[0];
    };

    if (section == "scene") {
      if (key == "frames") spec.frames = static_cast<int>(one());
      else if (key == "fps") spec.fps = one();
      else if (key == "width") spec.width = static_cast<int>(one());
      else if (key == "height") spec.height = static_cast<int>(one());
      else fail("unknown key '" + key + "' in [scene]");
    } else if (section == "camera") {
      if (key == "fx") spec.camera.fx = one();
      else if (key == "fy") spec.camera.fy = one();
      else if (key == "cx") spec.camera.cx = one();
      else if (key == "cy") spec.camera.cy = one();
      else fail("unknown key '" + key + "' in [camera]");
    } else if (section == "plane") {
      if (key == "base") {
        want(4);
        spec.base_plane = Vec4(vals[0], vals[1], vals[2], vals[3]);
      } else if (key == "pitch_amp_deg") spec.pitch_amp_deg = one();
      else if (key == "pitch_period_frames") {
        spec.pitch_period_frames = static_cast<int>(one());
      } else if (key == "k") spec.depth_scale = one();
      else fail("unknown key '" + key + "' in [plane]");
    } else if (section == "ego") {
      if (key == "forward_mps") spec.ego_forward = one();
      else if (key == "lateral_mps") spec.ego_lateral = one();
      else if (key == "yaw_rate_dps") spec.ego_yaw_rate_dps = one();
      else if (key == "d0") spec.d0 = one();
      else fail("unknown key '" + key + "' in [ego]");
    } else if (section == "vehicle") {
      VehicleSpec& v = spec.vehicles.back();
      if (key == "id") v.id = static_cast<int>(one());
      else if (key == "size") {
        want(3);
        v.width = vals[0];
        v.length = vals[1];
        v.height = vals[2];
      } else if (key == "start_pose") {
        want(3);
        v.x0 = vals[0];
        v.z0 = vals[1];
        v.yaw0_deg = vals[2];
      } else if (key == "velocity_mps") {
        want(2);
        v.v_lat = vals[0];
        v.v_fwd = vals[1];
      } else fail("unknown key '" + key + "' in [vehicle]");
    } else {
      fail("key outside any section");
    }
  }
  spec.validate();
  return spec;
}

SceneSpec parse_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene_spec_text(buf.str(), path);
}

SceneRenderer::SceneRenderer(const SceneSpec& spec)
    : spec_(spec), world_plane_(canonicalize_plane(spec.base_plane)) {
  spec_.validate();
  const double dt = 1.0 / spec_.fps;
  const double yaw_rate = deg2rad(spec_.ego_yaw_rate_dps);
  const double pitch_amp = deg2rad(spec_.pitch_amp_deg);

  poses_.resize(spec_.frames);
  double psi = 0.0;
  Vec3 rc(0.0, 0.0, -spec_.d0);
  for (int t = 0; t < spec_.frames; ++t) {
    const Mat3 ry = yaw_rotation(psi);
    EgoPose& p = poses_[t];
    p.yaw = psi;
    p.pitch = pitch_amp == 0.0
                  ? 0.0
                  : pitch_amp * std::sin(2.0 * kPi * t /
                                         spec_.pitch_period_frames);
    p.camera = rc + ry * Vec3(0.0, 0.0, spec_.d0);
    p.rotation = ry * pitch_rotation(p.pitch);
    rc += ry * Vec3(spec_.ego_lateral, 0.0, spec_.ego_forward) * dt;
    psi += yaw_rate * dt;
  }
}

const EgoPose& SceneRenderer::pose(int t) const {
  if (t < 0 || t >= spec_.frames) throw InvalidArgument("frame out of range");
  return poses_[t];
}

GroundPlane SceneRenderer::camera_plane(int t) const {
  const EgoPose& p = pose(t);
  const Vec3 n_c = p.rotation.transpose() * world_plane_.normal();
  const double d_c = world_plane_.d() + world_plane_.normal().dot(p.camera);
  return GroundPlane(n_c, d_c);
}

Vec3 SceneRenderer::vehicle_center(const VehicleSpec& v, int t) const {
  const double dt = 1.0 / spec_.fps;
  const Mat3 ry = yaw_rotation(deg2rad(v.yaw0_deg));
  const Vec3 vel = ry * Vec3(v.v_lat, 0.0, v.v_fwd);
  const double x = v.x0 + vel.x() * t * dt;
  const double z = v.z0 + vel.z() * t * dt;
  // Rides the plane: y balances the plane equation at (x, z).
  const Vec4 c = world_plane_.coeffs();
  const double y = -(c[0] * x + c[2] * z + c[3]) / c[1];
  return Vec3(x, y, z);
}

namespace {

struct VehicleGeom {
  Vec3 center;
  Vec3 heading, right, up;
  double half_len, half_wid, height;
};

struct RayHit {
  double s = 0.0;
  int vehicle = -1;  // index into the geometry list; -1 = ground
  bool any = false;
};

// Nearest surface along origin + s * dir, s > 0.
RayHit raycast(const Vec3& origin, const Vec3& dir, const GroundPlane& plane,
               const std::vector<VehicleGeom>& vehicles) {
  RayHit hit;
  const double denom = plane.normal().dot(dir);
  if (std::abs(denom) > 1e-12) {
    const double s = -plane.signed_distance(origin) / denom;
    if (s > kRayEps) {
      hit.s = s;
      hit.vehicle = -1;
      hit.any = true;
    }
  }
  for (size_t i = 0; i < vehicles.size(); ++i) {
    const VehicleGeom& v = vehicles[i];
    const Vec3 rel = origin - v.center;
    double enter = -std::numeric_limits<double>::infinity();
    double exit = std::numeric_limits<double>::infinity();
    bool miss = false;
    const Vec3 axes[3] = {v.right, v.heading, v.up};
    const double lo[3] = {-v.half_wid, -v.half_len, 0.0};
    const double hi[3] = {v.half_wid, v.half_len, v.height};
    for (int a = 0; a < 3 && !miss; ++a) {
      const double p = axes[a].dot(rel);
      const double q = axes[a].dot(dir);
      if (std::abs(q) < 1e-12) {
        if (p < lo[a] || p > hi[a]) miss = true;
        continue;
      }
      double t1 = (lo[a] - p) / q;
      double t2 = (hi[a] - p) / q;
      if (t1 > t2) std::swap(t1, t2);
      enter = std::max(enter, t1);
      exit = std::min(exit, t2);
      if (enter > exit) miss = true;
    }
    if (miss || enter <= kRayEps) continue;
    if (!hit.any || enter < hit.s) {
      hit.s = enter;
      hit.vehicle = static_cast<int>(i);
      hit.any = true;
    }
  }
  return hit;
}

}  // namespace

DepthRaster SceneRenderer::render_depth(int t) const {
  const EgoPose& p = pose(t);
  std::vector<VehicleGeom> geoms;
  for (const VehicleSpec& v : spec_.vehicles) {
    const VehicleBasis basis = vehicle_basis(v, world_plane_.normal());
    geoms.push_back({vehicle_center(v, t), basis.heading, basis.right,
                     -world_plane_.normal(), v.length / 2.0, v.width / 2.0,
                     v.height});
  }
  DepthRaster depth(spec_.width, spec_.height, 1);
  const CameraModel& cam = spec_.camera;
  for (int y = 0; y < spec_.height; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      const Vec3 dir_c((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
      const RayHit hit = raycast(p.camera, p.rotation * dir_c, world_plane_,
                                 geoms);
      // dir_c.z = 1, so the ray parameter equals camera-frame depth.
      depth.at(x, y, 0) =
          hit.any ? static_cast<float>(hit.s / spec_.depth_scale) : 0.0f;
    }
  }
  return depth;
}

FlowRaster SceneRenderer::render_flow(int t) const {
  if (t + 1 >= spec_.frames) {
    throw InvalidArgument("flow needs a successor frame");
  }
  const EgoPose& p0 = pose(t);
  const EgoPose& p1 = pose(t + 1);
  std::vector<VehicleGeom> geoms;
  std::vector<Vec3> shifts;
  for (const VehicleSpec& v : spec_.vehicles) {
    const VehicleBasis basis = vehicle_basis(v, world_plane_.normal());
    geoms.push_back({vehicle_center(v, t), basis.heading, basis.right,
                     -world_plane_.normal(), v.length / 2.0, v.width / 2.0,
                     v.height});
    shifts.push_back(vehicle_center(v, t + 1) - vehicle_center(v, t));
  }
  const Mat3 r1t = p1.rotation.transpose();
  const CameraModel& cam = spec_.camera;
  const float nanf = std::numeric_limits<float>::quiet_NaN();

  FlowRaster flow(spec_.width, spec_.height, 2);
  for (int y = 0; y < spec_.height; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      const Vec3 dir_c((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
      const RayHit hit = raycast(p0.camera, p0.rotation * dir_c, world_plane_,
                                 geoms);
      if (!hit.any) continue;  // sky keeps zero flow
      Vec3 world = p0.camera + hit.s * (p0.rotation * dir_c);
      if (hit.vehicle >= 0) world += shifts[hit.vehicle];
      const Vec3 next = r1t * (world - p1.camera);
      if (next.z() <= kMinFrontDepth) {
        flow.at(x, y, 0) = nanf;
        flow.at(x, y, 1) = nanf;
        continue;
      }
      const Pixel moved = project_camera(next, cam);
      flow.at(x, y, 0) = static_cast<float>(moved.x() - x);
      flow.at(x, y, 1) = static_cast<float>(moved.y() - y);
    }
  }
  return flow;
}

std::vector<BoxDetection> SceneRenderer::render_detections(int t) const {
  const EgoPose& p = pose(t);
  const Mat3 rt = p.rotation.transpose();
  const CameraModel& cam = spec_.camera;
  const Vec3 n = world_plane_.normal();

  std::vector<BoxDetection> dets;
  for (const VehicleSpec& v : spec_.vehicles) {
    const VehicleBasis basis = vehicle_basis(v, n);
    const Vec3 g = vehicle_center(v, t);
    const Vec3 b1w =
        g - (v.length / 2.0) * basis.heading - (v.width / 2.0) * basis.right;
    const Vec3 b2w = b1w + v.width * basis.right;
    const Vec3 b3w = b2w + v.length * basis.heading;
    const Vec3 t1w = b1w - v.height * n;

    const Vec3 pts[4] = {b1w, b2w, b3w, t1w};
    Pixel px[4];
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      const Vec3 pc = rt * (pts[i] - p.camera);
      if (pc.z() <= kMinFrontDepth) {
        ok = false;
        break;
      }
      px[i] = project_camera(pc, cam);
      ok = px[i].x() >= 0.0 && px[i].x() <= spec_.width - 1.0 &&
           px[i].y() >= 0.0 && px[i].y() <= spec_.height - 1.0;
    }
    if (!ok) continue;

    BoxDetection det;
    det.frame_id = t;
    det.vehicle_id = v.id;
    det.b1 = px[0];
    det.b2 = px[1];
    det.b3 = px[2];
    det.h_px = px[0].y() - px[3].y();
    dets.push_back(det);
  }
  return dets;
}

FrameBundle SceneRenderer::bundle(int t) const {
  FrameBundle b;
  b.frame_id = t;
  b.depth = render_depth(t);
  if (t + 1 < spec_.frames) b.flow = render_flow(t);
  b.detections = render_detections(t);
  return b;
}

SequenceTruth SceneRenderer::truth() const {
  SequenceTruth truth;
  const double fps = spec_.fps;
  for (int t = 0; t + 1 < spec_.frames; ++t) {
    const Vec3 v = poses_[t].rotation.transpose() *
                   (poses_[t + 1].camera - poses_[t].camera) * fps;
    truth.ego.push_back({t, to_kmh(v.x()), to_kmh(v.z())});
  }
  for (int t = 0; t < spec_.frames; ++t) {
    const EgoPose& p = poses_[t];
    const Mat3 rt = p.rotation.transpose();
    for (const VehicleSpec& v : spec_.vehicles) {
      const VehicleBasis basis = vehicle_basis(v, world_plane_.normal());
      const Vec3 g = vehicle_center(v, t);
      const Vec3 vel = rt * (vehicle_center(v, t + 1) - g) * fps;
      const Vec3 heading_c = rt * basis.heading;
      VehicleTruthRow row;
      row.frame = t;
      row.vehicle_id = v.id;
      row.position = rt * (g - p.camera);
      row.yaw_deg = rad2deg(std::atan2(heading_c.x(), heading_c.z()));
      row.vax_kmh = to_kmh(vel.x());
      row.vaz_kmh = to_kmh(vel.z());
      truth.vehicles.push_back(row);
    }
  }
  return truth;
}

namespace {

void add_depth_noise(DepthRaster& depth, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> dist(0.0, sigma);
  for (float& v : depth.data()) {
    if (v > 0.0f) v = std::max(0.0f, v + static_cast<float>(dist(rng)));
  }
}

void add_flow_noise(FlowRaster& flow, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> dist(0.0, sigma);
  for (float& v : flow.data()) {
    if (std::isfinite(v)) v += static_cast<float>(dist(rng));
  }
}

void add_detection_noise(std::vector<BoxDetection>& dets, double sigma,
                         std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> dist(0.0, sigma);
  for (BoxDetection& d : dets) {
    for (Pixel* p : {&d.b1, &d.b2, &d.b3}) {
      p->x() += dist(rng);
      p->y() += dist(rng);
    }
  }
}

}  // namespace

FrameBundle SynthSource::frame(int index) {
  FrameBundle b = renderer_.bundle(index);
  const NoiseSpec& noise = renderer_.spec().noise;
  {
    auto rng = noise_rng(noise.seed, index, 0);
    add_depth_noise(b.depth, noise.depth_sigma, rng);
  }
  if (b.flow) {
    auto rng = noise_rng(noise.seed, index, 1);
    add_flow_noise(*b.flow, noise.flow_sigma, rng);
  }
  {
    auto rng = noise_rng(noise.seed, index, 2);
    add_detection_noise(b.detections, noise.det_sigma, rng);
  }
  return b;
}

SequenceConfig SynthSource::config(const SequenceConfig& base) const {
  const SceneSpec& spec = renderer_.spec();
  SequenceConfig c = base;
  c.width = spec.width;
  c.height = spec.height;
  c.fps = spec.fps;
  c.camera = spec.camera;
  c.initial_plane = canonicalize_plane(spec.base_plane).coeffs();
  c.depth_scale.meters_per_unit = spec.depth_scale;
  c.d0 = spec.d0;
  return c;
}

void emit_sequence(const SceneSpec& spec, const std::string& out_dir) {
  spec.validate();
  fs::create_directories(fs::path(out_dir) / "depth");
  fs::create_directories(fs::path(out_dir) / "flow");
  fs::create_directories(fs::path(out_dir) / "truth");

  write_calibration((fs::path(out_dir) / "calib.txt").string(), spec.camera,
                    canonicalize_plane(spec.base_plane).coeffs(),
                    spec.depth_scale);

  SynthSource source(spec);
  std::vector<BoxDetection> all_dets;
  char name[16];
  for (int t = 0; t < spec.frames; ++t) {
    FrameBundle b = source.frame(t);
    std::snprintf(name, sizeof(name), "%06d.msr", t);
    write_raster(b.depth, fs::path(out_dir) / "depth" / name);
    if (b.flow) {
      write_raster(*b.flow, fs::path(out_dir) / "flow" / name);
    }
    all_dets.insert(all_dets.end(), b.detections.begin(), b.detections.end());
  }
  write_detections((fs::path(out_dir) / "detections.csv").string(), all_dets);
  write_truth(source.renderer().truth(), (fs::path(out_dir) / "truth").string());
}

}  // namespace sst
