#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sst/metrics.hpp"
#include "sst/pipeline.hpp"
#include "sst/synthscene.hpp"

namespace fs = std::filesystem;

namespace {

// Optional run-config file: `key= values` lines, # comments. Explicit
// command-line flags are applied afterwards and win.
void apply_config_file(const std::string& path, sst::SequenceConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw sst::IoError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string t = line.substr(first, last - first + 1);
    if (t.empty() || t[0] == '#') continue;

    const auto fail = [&](const std::string& why) {
      throw sst::ConfigError(path + ":" + std::to_string(line_no) + ": " +
                             why);
    };
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected 'key= values'");
    std::string key = t.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    std::vector<double> vals;
    {
      std::istringstream vs(t.substr(eq + 1));
      double v;
      while (vs >> v) vals.push_back(v);
      std::string rest;
      if (vs.clear(), vs >> rest) fail("bad value for '" + key + "'");
    }
    const auto want = [&](size_t n) {
      if (vals.size() != n) {
        fail("'" + key + "' takes " + std::to_string(n) + " value(s)");
      }
    };
    const auto one = [&]() {
      want(1);
      return vals[0];
    };

    if (key == "width") cfg.width = static_cast<int>(one());
    else if (key == "height") cfg.height = static_cast<int>(one());
    else if (key == "fps") cfg.fps = one();
    else if (key == "theta0") cfg.gates.theta0 = one();
    else if (key == "theta1") cfg.gates.theta1 = one();
    else if (key == "theta2") cfg.gates.theta2 = one();
    else if (key == "ransac_iterations") {
      cfg.ransac.iterations = static_cast<int>(one());
    } else if (key == "ransac_threshold") cfg.ransac.inlier_threshold = one();
    else if (key == "seed") cfg.ransac.seed = static_cast<uint64_t>(one());
    else if (key == "k") cfg.depth_scale.meters_per_unit = one();
    else if (key == "d0") cfg.d0 = one();
    else if (key == "max_hold_frames") {
      cfg.max_hold_frames = static_cast<int>(one());
    } else if (key == "correction") cfg.correction_enabled = one() != 0.0;
    else if (key == "plane") {
      want(4);
      cfg.initial_plane = sst::Vec4(vals[0], vals[1], vals[2], vals[3]);
    } else if (key == "roi") {
      want(4);
      cfg.ego_roi = sst::PixelRect{
          static_cast<int>(vals[0]), static_cast<int>(vals[1]),
          static_cast<int>(vals[2]), static_cast<int>(vals[3])};
    } else {
      fail("unknown key '" + key + "'");
    }
  }
}

void print_metrics(const sst::MetricsReport& m) {
  const auto line = [](const char* name, double v) {
    std::printf("%-24s %s\n", name, sst::fmt_g(v).c_str());
  };
  line("ego speed MAE (km/h)", m.ego_speed.mae);
  line("ego speed RMSE (km/h)", m.ego_speed.rmse);
  line("surround MAE (km/h)", m.surround_speed.mae);
  line("surround RMSE (km/h)", m.surround_speed.rmse);
  line("lateral MAE (m)", m.position.lateral.mae);
  line("longitudinal MAE (m)", m.position.longitudinal.mae);
  line("AOS (%)", m.aos_percent);
}

struct RunFlags {
  std::string seq;
  std::string out;
  std::string config_file;
  bool no_correction = false;
  double theta0 = 0, theta1 = 0, theta2 = 0;
  double k = 0, fps = 0, d0 = 0;
  uint64_t seed = 0;
  std::vector<int> roi;
};

int cmd_run(const CLI::App& cmd, const RunFlags& f) {
  sst::SequenceConfig base;
  if (!f.config_file.empty()) apply_config_file(f.config_file, base);

  // Directory calibration overrides the baseline; explicit flags
  // override both.
  sst::SequenceConfig cfg = sst::load_sequence_config(f.seq, base);
  if (cmd.count("--theta0")) cfg.gates.theta0 = f.theta0;
  if (cmd.count("--theta1")) cfg.gates.theta1 = f.theta1;
  if (cmd.count("--theta2")) cfg.gates.theta2 = f.theta2;
  if (cmd.count("--k")) cfg.depth_scale.meters_per_unit = f.k;
  if (cmd.count("--fps")) cfg.fps = f.fps;
  if (cmd.count("--d0")) cfg.d0 = f.d0;
  if (cmd.count("--seed")) cfg.ransac.seed = f.seed;
  if (cmd.count("--roi")) {
    cfg.ego_roi = sst::PixelRect{f.roi[0], f.roi[1], f.roi[2], f.roi[3]};
  }
  if (f.no_correction) cfg.correction_enabled = false;
  cfg.validate();

  sst::SequenceReader reader(f.seq, cfg);
  const sst::StateReport report = sst::run_sequence(reader, cfg);

  fs::create_directories(f.out);
  sst::write_report(report, f.out);
  std::printf("%d frames -> %zu ego, %zu vehicle records in %s\n",
              reader.size(), report.ego.size(), report.vehicles.size(),
              f.out.c_str());

  const fs::path truth_dir = fs::path(f.seq) / "truth";
  if (fs::is_directory(truth_dir)) {
    const sst::SequenceTruth truth = sst::read_truth(truth_dir.string());
    const sst::MetricsReport m = sst::evaluate(report, truth);
    sst::write_metrics(m, (fs::path(f.out) / "metrics.txt").string());
    print_metrics(m);
  }
  return 0;
}

int cmd_eval(const std::string& estimates, const std::string& truth_dir) {
  const sst::StateReport report = sst::read_report(estimates);
  const sst::SequenceTruth truth = sst::read_truth(truth_dir);
  const sst::MetricsReport m = sst::evaluate(report, truth);
  sst::write_metrics(m, (fs::path(estimates) / "metrics.txt").string());
  print_metrics(m);
  return 0;
}

struct SynthFlags {
  std::string spec;
  std::string out;
  double noise_depth = 0, noise_flow = 0, noise_det = 0;
  uint64_t seed = 0;
};

int cmd_synth(const CLI::App& cmd, const SynthFlags& f) {
  sst::SceneSpec spec = sst::parse_scene_spec(f.spec);
  if (cmd.count("--noise-depth")) spec.noise.depth_sigma = f.noise_depth;
  if (cmd.count("--noise-flow")) spec.noise.flow_sigma = f.noise_flow;
  if (cmd.count("--noise-det")) spec.noise.det_sigma = f.noise_det;
  if (cmd.count("--seed")) spec.noise.seed = f.seed;
  sst::emit_sequence(spec, f.out);
  std::printf("%d frames, %zu vehicles -> %s\n", spec.frames,
              spec.vehicles.size(), f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular surround-state estimation"};
  app.require_subcommand(1);

  RunFlags rf;
  CLI::App* run = app.add_subcommand(
      "run", "Estimate ego and surround state over a sequence directory");
  run->add_option("--seq", rf.seq, "Sequence directory")->required();
  run->add_option("--out", rf.out, "Output directory")->required();
  run->add_option("--config", rf.config_file, "Run-config file");
  run->add_flag("--no-correction", rf.no_correction,
                "Freeze the calibration plane");
  run->add_option("--theta0", rf.theta0,
                  "Normal gate vs the calibration plane (rad)");
  run->add_option("--theta1", rf.theta1,
                  "Normal gate vs the previous plane (rad)");
  run->add_option("--theta2", rf.theta2, "Relative offset gate");
  run->add_option("--k", rf.k, "Depth scale (m per raster unit)");
  run->add_option("--fps", rf.fps, "Frame rate");
  run->add_option("--d0", rf.d0, "Camera lead distance (m)");
  run->add_option("--seed", rf.seed, "Plane-fit sampling seed");
  run->add_option("--roi", rf.roi, "Ego flow window x,y,w,h")
      ->delimiter(',')
      ->expected(4);

  std::string estimates, truth_dir;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score an estimate directory against sequence truth");
  eval->add_option("--estimates", estimates, "Directory with ego/plane/vehicles csv")
      ->required();
  eval->add_option("--truth", truth_dir, "Directory with truth csv files")
      ->required();

  SynthFlags sf;
  CLI::App* synth = app.add_subcommand(
      "synth", "Render a synthetic sequence from a scene spec");
  synth->add_option("--spec", sf.spec, "Scene spec file")->required();
  synth->add_option("--out", sf.out, "Sequence directory to create")
      ->required();
  synth->add_option("--noise-depth", sf.noise_depth,
                    "Depth noise sigma (raster units)");
  synth->add_option("--noise-flow", sf.noise_flow, "Flow noise sigma (px)");
  synth->add_option("--noise-det", sf.noise_det,
                    "Detection vertex noise sigma (px)");
  synth->add_option("--seed", sf.seed, "Noise seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(*run, rf);
    if (eval->parsed()) return cmd_eval(estimates, truth_dir);
    if (synth->parsed()) return cmd_synth(*synth, sf);
  } catch (const sst::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
