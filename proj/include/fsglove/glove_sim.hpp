#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fsglove/hand_model.hpp"
#include "fsglove/rng.hpp"
#include "fsglove/so3.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

/// Ground-truth sensor rig: world alignment, per-sensor installation error,
/// and the dorsal tracker's frame.
struct SensorExtrinsics {
  Mat3 world_alignment = Mat3::Identity();  // A: model world from IMU world
  std::array<Mat3, kNumLinks> installation;  // C_i, sensor i on link i
  Mat3 dorsal_rotation = Mat3::Identity();   // tracker world from model world
  Vec3 dorsal_translation = Vec3::Zero();    // mm

  SensorExtrinsics() { installation.fill(Mat3::Identity()); }

  static SensorExtrinsics random(Rng& rng, double max_angle_rad);
};

/// Sigma parameters are the expected angular error magnitude in degrees
/// (half-normal with scale sigma * sqrt(pi/2)); drift_rate is the expected
/// yaw error in degrees after one minute, growing with sqrt(t).
struct NoiseModel {
  double sigma_static_deg = 0.8;
  double sigma_dynamic_deg = 2.5;
  double dynamic_threshold_deg_s = 30.0;
  double drift_rate_deg_per_sqrt_min = 1.0;
  double dorsal_sigma_pos_mm = 0.5;
  std::uint64_t seed = 0;

  static NoiseModel silent(std::uint64_t seed = 0) {
    NoiseModel n;
    n.sigma_static_deg = n.sigma_dynamic_deg = 0.0;
    n.drift_rate_deg_per_sqrt_min = 0.0;
    n.dorsal_sigma_pos_mm = 0.0;
    n.seed = seed;
    return n;
  }
};

struct ImuSample {
  int sensor_id = 0;
  Timestamp timestamp = 0;
  UnitQuaternion orientation;  // fused absolute orientation R^W
  Vec3 angular_velocity = Vec3::Zero();     // rad/s, body frame
  Vec3 linear_acceleration = Vec3::Zero();  // m/s^2, specific force
};

struct DorsalSample {
  Timestamp timestamp = 0;
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();  // mm

  Mat3 rotation_matrix() const { return quat_to_matrix(rotation); }
};

struct TrajectoryPoint {
  Timestamp timestamp = 0;
  PoseParams pose;
};

struct Trajectory {
  double rate_hz = 100.0;
  VecX beta;
  std::vector<TrajectoryPoint> points;
};

/// Reference pose kinds; the values double as segment-marker kinds on the
/// wire, so they are pinned.
enum class RefPose : std::uint8_t {
  rest = 0,
  x_rot = 1,
  y_rot = 2,
  pinch_index = 3,
  pinch_middle = 4,
  pinch_ring = 5,
  pinch_little = 6,
};

const char* ref_pose_name(RefPose kind);
bool is_pinch(RefPose kind);
/// 1..4 for pinch kinds.
int pinch_finger(RefPose kind);

/// The held configuration for a reference kind. Pinch poses are solved so
/// that the contact pair actually touches under the given shape.
PoseParams reference_pose(const HandModel& model, RefPose kind,
                          const VecX& beta);

/// Refines a contact-table preset until its contact pairs coincide under
/// beta (damped least squares on the touching chains' joint rotations).
PoseParams solve_contact_pose(const HandModel& model, int contact_pose_index,
                              const VecX& beta);

/// One reference pose with a 0.5 s ease-in from rest, then a static hold.
Trajectory make_reference_trajectory(const HandModel& model, RefPose kind,
                                     const VecX& beta, double duration_s,
                                     double rate_hz);

struct ScenarioSegment {
  RefPose kind = RefPose::rest;
  double hold_s = 2.0;
};

/// Hold window of one segment within a composed trajectory (ease-in excluded).
struct SegmentSpan {
  RefPose kind = RefPose::rest;
  Timestamp hold_begin = 0;
  Timestamp hold_end = 0;  // timestamp of the last hold tick
};

struct ScenarioTrajectory {
  Trajectory trajectory;
  std::vector<SegmentSpan> spans;
};

/// Chains segments with a 0.5 s geodesic ease between consecutive holds.
ScenarioTrajectory make_scenario_trajectory(
    const HandModel& model, const VecX& beta,
    const std::vector<ScenarioSegment>& segments, double rate_hz);

/// Inverts the calibration equation per tick: the emitted orientation is
/// noise * A^-1 * R^M_i * C_i * drift(t).
std::array<std::vector<ImuSample>, kNumLinks> synthesize_imu(
    const Trajectory& trajectory, const SensorExtrinsics& extrinsics,
    const NoiseModel& noise, const HandModel& model);

std::vector<DorsalSample> synthesize_dorsal(const Trajectory& trajectory,
                                            const SensorExtrinsics& extrinsics,
                                            const NoiseModel& noise);

/// Two-sensor hinge sweep for the single-joint error experiment: sensor A is
/// the fixed base, sensor B rotates about z from 0 to max_angle.
struct HingeSweep {
  std::vector<double> reference_deg;
  std::vector<double> measured_deg;
};

HingeSweep simulate_hinge(double duration_s, double rate_hz,
                          double max_angle_deg, const NoiseModel& noise);

/// Visible-hemisphere vertex subset of a mesh with per-axis position noise;
/// stands in for a depth-camera partial view.
MatX synthesize_partial_cloud(const HandMesh& mesh, const Vec3& view_dir,
                              double noise_mm, Rng& rng);

}  // namespace fsglove
