#include "fsglove/session.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "fsglove/errors.hpp"

namespace fsglove {

namespace {

using nlohmann::json;

json rot_to_json(const Mat3& r) {
  json out = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.push_back(r(i, k));
  return out;
}

Mat3 rot_from_json(const json& j) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r(i, k) = j[i * 3 + k].get<double>();
  return r;
}

RefPose ref_pose_from_name(const std::string& name) {
  for (int k = 0; k <= 6; ++k)
    if (name == ref_pose_name(static_cast<RefPose>(k)))
      return static_cast<RefPose>(k);
  throw SchemaError("unknown segment kind: " + name);
}

json noise_to_json(const NoiseModel& n) {
  json j;
  j["sigma_static_deg"] = n.sigma_static_deg;
  j["sigma_dynamic_deg"] = n.sigma_dynamic_deg;
  j["dynamic_threshold_deg_s"] = n.dynamic_threshold_deg_s;
  j["drift_rate_deg_per_sqrt_min"] = n.drift_rate_deg_per_sqrt_min;
  j["dorsal_sigma_pos_mm"] = n.dorsal_sigma_pos_mm;
  j["seed"] = n.seed;
  return j;
}

NoiseModel noise_from_json(const json& j, std::uint64_t seed) {
  NoiseModel n;
  n.seed = seed;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "silent") return NoiseModel::silent(seed);
    if (name == "default") return n;
    throw SchemaError("unknown noise preset: " + name);
  }
  n.sigma_static_deg = j.value("sigma_static_deg", n.sigma_static_deg);
  n.sigma_dynamic_deg = j.value("sigma_dynamic_deg", n.sigma_dynamic_deg);
  n.dynamic_threshold_deg_s =
      j.value("dynamic_threshold_deg_s", n.dynamic_threshold_deg_s);
  n.drift_rate_deg_per_sqrt_min =
      j.value("drift_rate_deg_per_sqrt_min", n.drift_rate_deg_per_sqrt_min);
  n.dorsal_sigma_pos_mm = j.value("dorsal_sigma_pos_mm", n.dorsal_sigma_pos_mm);
  n.seed = j.value("seed", seed);
  return n;
}

}  // namespace

std::vector<ScenarioSegment> calibration_segments(double ref_hold_s,
                                                  double pinch_hold_s) {
  return {
      {RefPose::rest, ref_hold_s},         {RefPose::x_rot, ref_hold_s},
      {RefPose::y_rot, ref_hold_s},        {RefPose::pinch_index, pinch_hold_s},
      {RefPose::pinch_middle, pinch_hold_s}, {RefPose::pinch_ring, pinch_hold_s},
      {RefPose::pinch_little, pinch_hold_s},
  };
}

Scenario default_calibration_scenario(std::uint64_t seed) {
  Scenario scenario;
  scenario.segments = calibration_segments();
  scenario.beta = VecX::Zero(kDefaultShapeDim);
  scenario.noise.seed = seed;
  return scenario;
}

Scenario load_scenario(const std::string& path, const HandModel& model,
                       std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed scenario " + path + ": " + e.what());
  }

  Scenario scenario;
  const std::uint64_t seed =
      seed_override ? *seed_override : j.value("seed", 0ULL);
  scenario.rate_hz = j.value("rate_hz", 100.0);
  if (!j.contains("segments")) throw SchemaError("scenario needs segments");
  for (const json& seg : j["segments"])
    scenario.segments.push_back(
        {ref_pose_from_name(seg.at("kind").get<std::string>()),
         seg.value("hold_s", 2.0)});

  const int B = model.skeleton.shape_dim;
  scenario.beta = VecX::Zero(B);
  if (j.contains("beta")) {
    if (j["beta"].is_object()) {
      const double max_abs = j["beta"].value("random_max", 2.0);
      Rng rng(mix_seed(seed, 10));
      for (int b = 0; b < B; ++b) scenario.beta[b] = rng.uniform(-max_abs, max_abs);
    } else {
      const auto beta = j["beta"].get<std::vector<double>>();
      if (static_cast<int>(beta.size()) != B)
        throw SchemaError("beta has wrong dimension");
      scenario.beta = Eigen::Map<const VecX>(beta.data(), B);
    }
  }

  if (j.contains("extrinsics")) {
    const json& ext = j["extrinsics"];
    if (ext.is_string() && ext.get<std::string>() == "identity") {
      // default-constructed
    } else if (ext.is_object() && ext.contains("random_max_deg")) {
      Rng rng(mix_seed(seed, 11));
      scenario.extrinsics =
          SensorExtrinsics::random(rng, deg_to_rad(ext["random_max_deg"].get<double>()));
    } else if (ext.is_object()) {
      scenario.extrinsics.world_alignment = rot_from_json(ext.at("world_alignment"));
      for (int i = 0; i < kNumLinks; ++i)
        scenario.extrinsics.installation[i] = rot_from_json(ext.at("installation")[i]);
      if (ext.contains("dorsal_rotation")) {
        scenario.extrinsics.dorsal_rotation = rot_from_json(ext["dorsal_rotation"]);
        for (int a = 0; a < 3; ++a)
          scenario.extrinsics.dorsal_translation[a] =
              ext.at("dorsal_translation")[a].get<double>();
      }
    } else {
      throw SchemaError("unrecognized extrinsics directive");
    }
  }

  scenario.noise = j.contains("noise") ? noise_from_json(j["noise"], seed)
                                       : NoiseModel{.seed = seed};
  if (seed_override) scenario.noise.seed = *seed_override;
  return scenario;
}

SimulationOutput simulate_scenario(const HandModel& model,
                                   const Scenario& scenario) {
  SimulationOutput out;
  out.scenario =
      make_scenario_trajectory(model, scenario.beta, scenario.segments, scenario.rate_hz);
  out.imu = synthesize_imu(out.scenario.trajectory, scenario.extrinsics,
                           scenario.noise, model);
  out.dorsal =
      synthesize_dorsal(out.scenario.trajectory, scenario.extrinsics, scenario.noise);

  std::multimap<Timestamp, SegmentMarker> starts, ends;
  for (const SegmentSpan& span : out.scenario.spans) {
    starts.insert({span.hold_begin, {span.kind, false, span.hold_begin}});
    ends.insert({span.hold_end, {span.kind, true, span.hold_end}});
  }

  const auto& points = out.scenario.trajectory.points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Timestamp t = points[k].timestamp;
    for (auto [it, stop] = starts.equal_range(t); it != stop; ++it)
      out.frames.push_back(encode_packet(it->second));
    for (int i = 0; i < kNumLinks; ++i)
      out.frames.push_back(encode_packet(out.imu[i][k]));
    out.frames.push_back(encode_packet(out.dorsal[k]));
    for (auto [it, stop] = ends.equal_range(t); it != stop; ++it)
      out.frames.push_back(encode_packet(it->second));
  }
  return out;
}

void save_sidecar(const Scenario& scenario, const std::string& model_hash,
                  const std::string& path) {
  json j;
  j["schema"] = "fsglove-sidecar";
  j["version"] = 1;
  j["model_hash"] = model_hash;
  j["rate_hz"] = scenario.rate_hz;
  json segments = json::array();
  for (const ScenarioSegment& seg : scenario.segments)
    segments.push_back({{"kind", ref_pose_name(seg.kind)}, {"hold_s", seg.hold_s}});
  j["segments"] = segments;
  j["beta"] = std::vector<double>(scenario.beta.begin(), scenario.beta.end());
  j["world_alignment"] = rot_to_json(scenario.extrinsics.world_alignment);
  json inst = json::array();
  for (const Mat3& c : scenario.extrinsics.installation)
    inst.push_back(rot_to_json(c));
  j["installation"] = inst;
  j["dorsal_rotation"] = rot_to_json(scenario.extrinsics.dorsal_rotation);
  j["dorsal_translation"] =
      json::array({scenario.extrinsics.dorsal_translation.x(),
                   scenario.extrinsics.dorsal_translation.y(),
                   scenario.extrinsics.dorsal_translation.z()});
  j["noise"] = noise_to_json(scenario.noise);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sidecar: " + path);
  out << j.dump(2) << "\n";
}

Scenario load_sidecar(const std::string& path, std::string* model_hash) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read sidecar: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed sidecar " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "fsglove-sidecar")
    throw ParseError("not a sidecar file: " + path);
  if (model_hash) *model_hash = j.value("model_hash", "");

  Scenario scenario;
  scenario.rate_hz = j.value("rate_hz", 100.0);
  for (const json& seg : j.at("segments"))
    scenario.segments.push_back(
        {ref_pose_from_name(seg.at("kind").get<std::string>()),
         seg.at("hold_s").get<double>()});
  const auto beta = j.at("beta").get<std::vector<double>>();
  scenario.beta = Eigen::Map<const VecX>(beta.data(), static_cast<int>(beta.size()));
  scenario.extrinsics.world_alignment = rot_from_json(j.at("world_alignment"));
  for (int i = 0; i < kNumLinks; ++i)
    scenario.extrinsics.installation[i] = rot_from_json(j.at("installation")[i]);
  scenario.extrinsics.dorsal_rotation = rot_from_json(j.at("dorsal_rotation"));
  for (int a = 0; a < 3; ++a)
    scenario.extrinsics.dorsal_translation[a] =
        j.at("dorsal_translation")[a].get<double>();
  scenario.noise = noise_from_json(j.at("noise"), j["noise"].value("seed", 0ULL));
  return scenario;
}

std::vector<HoldWindow> hold_windows(const std::vector<SegmentMarker>& markers) {
  std::vector<HoldWindow> windows;
  std::optional<SegmentMarker> open;
  for (const SegmentMarker& m : markers) {
    if (!m.hold_end) {
      open = m;
    } else if (open && open->kind == m.kind) {
      windows.push_back({m.kind, open->timestamp, m.timestamp});
      open.reset();
    }
  }
  return windows;
}

CalibrationReport calibrate_recording(const Recording& recording,
                                      const HandModel& model) {
  const SessionStreams streams = split_recording(recording);
  CalibrationReport report;
  report.windows = hold_windows(streams.markers);

  auto samples_in = [&](int sensor, const HoldWindow& w) {
    std::vector<ImuSample> picked;
    for (const ImuSample& s : streams.imu[sensor])
      if (s.timestamp >= w.begin && s.timestamp <= w.end) picked.push_back(s);
    return picked;
  };

  const VecX beta0 = VecX::Zero(model.skeleton.shape_dim);

  // Reference captures and their model-side link rotations.
  std::vector<ReferenceCapture> captures;
  std::vector<std::array<Mat3, kNumLinks>> virtual_refs;
  std::vector<const HoldWindow*> ref_windows;
  for (const HoldWindow& w : report.windows) {
    if (is_pinch(w.kind)) continue;
    ReferenceCapture capture;
    capture.kind = w.kind;
    capture.sample_count = 0;
    for (int i = 0; i < kNumLinks; ++i) {
      const auto picked = samples_in(i, w);
      const auto [mean, spread] = aggregate_static_segment(picked);
      capture.mean_world[i] = mean;
      capture.spread_deg[i] = spread;
      capture.sample_count = capture.sample_count == 0
                                 ? static_cast<int>(picked.size())
                                 : std::min(capture.sample_count,
                                            static_cast<int>(picked.size()));
    }
    captures.push_back(capture);
    const auto fk = forward_kinematics(model.skeleton, beta0,
                                       reference_pose(model, w.kind, beta0));
    std::array<Mat3, kNumLinks> refs;
    for (int i = 0; i < kNumLinks; ++i) refs[i] = fk[i].rotation;
    virtual_refs.push_back(refs);
    ref_windows.push_back(&w);
  }

  report.file.pose = solve_alignment(captures, virtual_refs);
  report.file.model_hash = model_content_hash(model);

  // Dorsal alignment from the same reference holds.
  std::vector<DorsalPosePair> dorsal_pairs;
  for (std::size_t k = 0; k < ref_windows.size(); ++k) {
    const HoldWindow& w = *ref_windows[k];
    std::vector<Mat3> rotations;
    Vec3 mean_t = Vec3::Zero();
    int count = 0;
    for (const DorsalSample& s : streams.dorsal)
      if (s.timestamp >= w.begin && s.timestamp <= w.end) {
        rotations.push_back(s.rotation_matrix());
        mean_t += s.translation;
        ++count;
      }
    if (count == 0) continue;
    const PoseParams ref = reference_pose(model, w.kind, beta0);
    dorsal_pairs.push_back({average_rotation(rotations), mean_t / count,
                            ref.root_rotation, ref.root_translation});
  }
  if (dorsal_pairs.size() >= 2)
    report.file.dorsal = solve_dorsal_alignment(dorsal_pairs);

  // Pinch captures: aggregate each hold, reconstruct the pose, fit beta.
  std::vector<PinchCapture> pinches;
  for (const HoldWindow& w : report.windows) {
    if (!is_pinch(w.kind)) continue;
    FrameSet frame;
    frame.timestamp = w.begin;
    for (int i = 0; i < kNumLinks; ++i) {
      const auto picked = samples_in(i, w);
      const auto [mean, spread] = aggregate_static_segment(picked);
      ImuSample s;
      s.sensor_id = i;
      s.timestamp = w.begin;
      s.orientation = matrix_to_quat(mean);
      frame.imu[i] = s;
    }
    const PoseParams pose =
        reconstruct_pose(frame, report.file.pose,
                         report.file.dorsal.value_or(DorsalAlignment{}),
                         model.skeleton);
    const int finger = pinch_finger(w.kind);
    for (std::size_t c = 0; c < model.contact_poses.size(); ++c)
      if (model.contact_poses[c].finger == finger)
        pinches.push_back({pose, static_cast<int>(c)});
  }
  if (pinches.empty()) {
    report.shape_skipped = true;
  } else {
    report.file.shape = calibrate_shape(model, pinches, beta0);
  }
  return report;
}

ReconstructionResult reconstruct_recording(const Recording& recording,
                                           const CalibrationFile& calib,
                                           const HandModel& model,
                                           Timestamp window_ns) {
  if (!calib.model_hash.empty() &&
      calib.model_hash != model_content_hash(model))
    throw ModelHashMismatch("calibration was made for model hash " +
                            calib.model_hash);
  const SessionStreams streams = split_recording(recording);
  ReconstructionResult result;
  const auto frames =
      synchronize(streams.imu, streams.dorsal, {window_ns}, &result.sync);
  result.poses.reserve(frames.size());
  const DorsalAlignment dorsal = calib.dorsal.value_or(DorsalAlignment{});
  for (const FrameSet& frame : frames)
    result.poses.emplace_back(
        frame.timestamp, reconstruct_pose(frame, calib.pose, dorsal, model.skeleton));
  return result;
}

}  // namespace fsglove
