#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsglove/acquisition.hpp"
#include "fsglove/diffhcal.hpp"
#include "fsglove/glove_sim.hpp"
#include "fsglove/hand_model.hpp"

namespace fsglove {

/// A fully resolved generation recipe: everything the simulator needs to
/// produce a session deterministically.
struct Scenario {
  std::vector<ScenarioSegment> segments;
  double rate_hz = 100.0;
  VecX beta;
  SensorExtrinsics extrinsics;
  NoiseModel noise;
};

/// Three reference holds followed by the four pinch holds.
std::vector<ScenarioSegment> calibration_segments(double ref_hold_s = 3.0,
                                                  double pinch_hold_s = 2.0);

/// Reads a scenario config; "beta" and "extrinsics" may be explicit or
/// {"random_max": x} / {"random_max_deg": x} directives resolved from the
/// seed (overridable). Throws ParseError / SchemaError.
Scenario load_scenario(const std::string& path, const HandModel& model,
                       std::optional<std::uint64_t> seed_override = {});

Scenario default_calibration_scenario(std::uint64_t seed);

struct SimulationOutput {
  ScenarioTrajectory scenario;
  std::array<std::vector<ImuSample>, kNumLinks> imu;
  std::vector<DorsalSample> dorsal;
  std::vector<std::vector<std::uint8_t>> frames;  // wire packets in order
};

/// Runs the simulator and lays the streams out in wire order: per tick the
/// segment start markers, the 16 IMU samples, the dorsal sample, then any
/// segment end markers.
SimulationOutput simulate_scenario(const HandModel& model,
                                   const Scenario& scenario);

inline constexpr std::uint32_t kSessionStreamCount = 17;  // 16 IMU + dorsal

/// Answer-key sidecar: the resolved scenario plus the model hash.
void save_sidecar(const Scenario& scenario, const std::string& model_hash,
                  const std::string& path);
Scenario load_sidecar(const std::string& path, std::string* model_hash = nullptr);

/// Hold windows extracted from segment markers, in recording order.
struct HoldWindow {
  RefPose kind = RefPose::rest;
  Timestamp begin = 0;
  Timestamp end = 0;
};

std::vector<HoldWindow> hold_windows(const std::vector<SegmentMarker>& markers);

struct CalibrationReport {
  CalibrationFile file;
  bool shape_skipped = false;
  std::vector<HoldWindow> windows;
};

/// Full calibration flow on a marked recording: static aggregation, the
/// alignment solve, pinch pose reconstruction, shape fit, dorsal alignment.
CalibrationReport calibrate_recording(const Recording& recording,
                                      const HandModel& model);

struct ReconstructionResult {
  std::vector<std::pair<Timestamp, PoseParams>> poses;
  SyncStats sync;
};

ReconstructionResult reconstruct_recording(const Recording& recording,
                                           const CalibrationFile& calib,
                                           const HandModel& model,
                                           Timestamp window_ns = 10'000'000);

}  // namespace fsglove
