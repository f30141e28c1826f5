#include <doctest.h>

#include <fstream>

#include "fsglove/metrics.hpp"
#include "fsglove/session.hpp"

using namespace fsglove;

namespace {

const HandModel& model() {
  static const HandModel m = make_default_hand();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("session");

TEST_CASE("default calibration scenario carries three references and four pinches") {
  const auto segments = calibration_segments();
  REQUIRE(segments.size() == 7);
  int refs = 0, pinches = 0;
  for (const ScenarioSegment& seg : segments)
    (is_pinch(seg.kind) ? pinches : refs)++;
  CHECK(refs == 3);
  CHECK(pinches == 4);
}

TEST_CASE("simulation emits paired hold markers for every segment") {
  Scenario scenario = default_calibration_scenario(0);
  scenario.noise = NoiseModel::silent();
  const SimulationOutput sim = simulate_scenario(model(), scenario);
  write_recording("/tmp/fsglove_test_session.fsgr", kSessionStreamCount, sim.frames);
  const Recording rec = read_recording("/tmp/fsglove_test_session.fsgr");
  const SessionStreams streams = split_recording(rec);
  const auto windows = hold_windows(streams.markers);
  REQUIRE(windows.size() == scenario.segments.size());
  for (std::size_t k = 0; k < windows.size(); ++k) {
    CHECK(windows[k].kind == scenario.segments[k].kind);
    CHECK(windows[k].begin < windows[k].end);
  }
  // every imu stream covers every window with enough samples
  for (const HoldWindow& w : windows) {
    int count = 0;
    for (const ImuSample& s : streams.imu[0])
      if (s.timestamp >= w.begin && s.timestamp <= w.end) ++count;
    CHECK(count >= kMinStaticSamples);
  }
}

TEST_CASE("zero-noise pipeline recovers the answer key through the wire") {
  Scenario scenario;
  scenario.segments = calibration_segments(1.0, 1.0);
  scenario.beta = VecX::Zero(model().skeleton.shape_dim);
  Rng brng(mix_seed(3, 10));
  for (int b = 0; b < scenario.beta.size(); ++b)
    scenario.beta[b] = brng.uniform(-2, 2);
  Rng erng(mix_seed(3, 11));
  scenario.extrinsics = SensorExtrinsics::random(erng, deg_to_rad(30));
  scenario.noise = NoiseModel::silent(3);

  const SimulationOutput sim = simulate_scenario(model(), scenario);
  const std::string path = "/tmp/fsglove_test_pipeline.fsgr";
  write_recording(path, kSessionStreamCount, sim.frames);
  const Recording rec = read_recording(path);

  const CalibrationReport report = calibrate_recording(rec, model());
  CHECK(!report.shape_skipped);
  CHECK(geodesic_angle(report.file.pose.world_alignment,
                       scenario.extrinsics.world_alignment) < 1e-6);
  for (int i = 0; i < kNumLinks; ++i)
    CHECK(geodesic_angle(report.file.pose.installation[i],
                         scenario.extrinsics.installation[i]) < 1e-6);
  REQUIRE(report.file.dorsal.has_value());
  CHECK(geodesic_angle(report.file.dorsal->rotation,
                       Mat3(scenario.extrinsics.dorsal_rotation.transpose())) < 1e-6);

  const ReconstructionResult recon = reconstruct_recording(rec, report.file, model());
  REQUIRE(recon.poses.size() == sim.scenario.trajectory.points.size());
  double worst_joint = 0.0, worst_translation = 0.0;
  for (std::size_t k = 0; k < recon.poses.size(); ++k) {
    const PoseParams& truth = sim.scenario.trajectory.points[k].pose;
    const PoseParams& est = recon.poses[k].second;
    worst_joint = std::max(worst_joint,
                           geodesic_angle(truth.root_rotation, est.root_rotation));
    for (int j = 0; j < kNumJoints; ++j)
      worst_joint = std::max(
          worst_joint,
          geodesic_angle(truth.joint_rotations[j], est.joint_rotations[j]));
    worst_translation = std::max(
        worst_translation, (truth.root_translation - est.root_translation).norm());
  }
  CHECK(worst_joint < 1e-6);
  CHECK(worst_translation < 1e-6);

  // shape: fingertip rest geometry matches the generating shape
  const PoseParams rest;
  for (int f = 0; f < kNumFingers; ++f) {
    const Vec3 truth =
        vertex_position(model(), scenario.beta, rest, model().fingertips[f]);
    const Vec3 fit = vertex_position(model(), report.file.shape->beta, rest,
                                     model().fingertips[f]);
    CHECK((truth - fit).norm() < 1.0);
  }
}

TEST_CASE("recordings without pinch segments yield a pose-only calibration") {
  Scenario scenario;
  scenario.segments = {{RefPose::rest, 1.0}, {RefPose::x_rot, 1.0},
                       {RefPose::y_rot, 1.0}};
  scenario.beta = VecX::Zero(model().skeleton.shape_dim);
  scenario.noise = NoiseModel::silent(1);
  const SimulationOutput sim = simulate_scenario(model(), scenario);
  write_recording("/tmp/fsglove_test_noshape.fsgr", kSessionStreamCount, sim.frames);
  const CalibrationReport report =
      calibrate_recording(read_recording("/tmp/fsglove_test_noshape.fsgr"), model());
  CHECK(report.shape_skipped);
  CHECK(!report.file.shape.has_value());
}

TEST_CASE("reconstruction rejects a mismatched model hash") {
  Scenario scenario;
  scenario.segments = {{RefPose::rest, 0.5}};
  scenario.beta = VecX::Zero(model().skeleton.shape_dim);
  scenario.noise = NoiseModel::silent(2);
  const SimulationOutput sim = simulate_scenario(model(), scenario);
  write_recording("/tmp/fsglove_test_hash.fsgr", kSessionStreamCount, sim.frames);
  CalibrationFile calib;
  calib.model_hash = "deadbeefdeadbeef";
  CHECK_THROWS_AS(
      reconstruct_recording(read_recording("/tmp/fsglove_test_hash.fsgr"), calib,
                            model()),
      ModelHashMismatch);
}

TEST_CASE("sidecar round trip preserves the resolved scenario") {
  Scenario scenario = default_calibration_scenario(9);
  Rng rng(mix_seed(9, 11));
  scenario.extrinsics = SensorExtrinsics::random(rng, deg_to_rad(25));
  scenario.beta = VecX::LinSpaced(model().skeleton.shape_dim, -1.5, 1.5);
  const std::string path = "/tmp/fsglove_test_sidecar.json";
  save_sidecar(scenario, model_content_hash(model()), path);
  std::string hash;
  const Scenario loaded = load_sidecar(path, &hash);
  CHECK(hash == model_content_hash(model()));
  CHECK(loaded.segments.size() == scenario.segments.size());
  CHECK((loaded.beta - scenario.beta).norm() == 0.0);
  CHECK((loaded.extrinsics.world_alignment - scenario.extrinsics.world_alignment)
            .norm() == 0.0);
  CHECK(loaded.noise.seed == scenario.noise.seed);
}

TEST_CASE("scenario files resolve random directives deterministically") {
  const std::string path = "/tmp/fsglove_test_scenario.json";
  std::ofstream out(path);
  out << R"({
    "seed": 5,
    "rate_hz": 100,
    "segments": [{"kind": "rest", "hold_s": 1.0}, {"kind": "pinch_index", "hold_s": 0.5}],
    "beta": {"random_max": 2.0},
    "extrinsics": {"random_max_deg": 30.0},
    "noise": "silent"
  })";
  out.close();
  const Scenario a = load_scenario(path, model());
  const Scenario b = load_scenario(path, model());
  CHECK((a.beta - b.beta).norm() == 0.0);
  CHECK((a.extrinsics.world_alignment - b.extrinsics.world_alignment).norm() == 0.0);
  CHECK(a.beta.cwiseAbs().maxCoeff() <= 2.0);
  CHECK(a.noise.sigma_static_deg == 0.0);
  REQUIRE(a.segments.size() == 2);
  CHECK(a.segments[1].kind == RefPose::pinch_index);
}

TEST_SUITE_END();
