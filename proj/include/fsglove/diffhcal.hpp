#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsglove/acquisition.hpp"
#include "fsglove/glove_sim.hpp"
#include "fsglove/hand_model.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

/// Chordal mean plus max deviation of one sensor's orientations over a
/// static hold. Throws TooFewSamples (< 10) and ExcessiveSpread (>= 5 deg).
std::pair<Mat3, double> aggregate_static_segment(
    const std::vector<ImuSample>& samples);

inline constexpr int kMinStaticSamples = 10;
inline constexpr double kMaxStaticSpreadDeg = 5.0;

/// One reference pose's aggregated sensor readings.
struct ReferenceCapture {
  RefPose kind = RefPose::rest;
  std::array<Mat3, kNumLinks> mean_world;  // aggregated R^W_i
  std::array<double, kNumLinks> spread_deg{};
  int sample_count = 0;
};

struct CalibrationResult {
  Mat3 world_alignment = Mat3::Identity();      // A
  std::array<Mat3, kNumLinks> installation;     // C_i
  MatX residuals_deg;                           // sensors x poses
  std::vector<double> objective_trace;          // Frobenius objective per iteration
  int iterations = 0;
  bool converged = false;

  CalibrationResult() { installation.fill(Mat3::Identity()); }
};

/// Alternating chordal least squares on R^M_i C_i = A R^W_i over >= 2
/// reference poses. virtual_refs[k][i] is the model-side link rotation of
/// sensor i in capture k.
CalibrationResult solve_alignment(
    const std::vector<ReferenceCapture>& captures,
    const std::vector<std::array<Mat3, kNumLinks>>& virtual_refs);

/// R^M = A R^W C^-1.
inline Mat3 corrected_link_rotation(const Mat3& world, const Mat3& alignment,
                                    const Mat3& installation) {
  return alignment * world * installation.transpose();
}

/// Parent-local joint rotation consumed by PoseParams.
inline Mat3 joint_rotation(const Mat3& link, const Mat3& parent) {
  return parent.transpose() * link;
}

/// World-frame relative rotation (diagnostic companion of joint_rotation).
inline Mat3 joint_rotation_world(const Mat3& link, const Mat3& parent) {
  return link * parent.transpose();
}

struct DorsalAlignment {
  Mat3 rotation = Mat3::Identity();  // model world from tracker world
  Vec3 translation = Vec3::Zero();   // mm
};

/// Root pose from the corrected dorsum sensor, joint rotations down the
/// chains, translation from the dorsal tracker when present.
PoseParams reconstruct_pose(const FrameSet& frame,
                            const CalibrationResult& calib,
                            const DorsalAlignment& dorsal,
                            const SkeletonDef& skeleton);

struct ShapeResult {
  VecX beta;
  double e_shape = 0.0;               // mm^2 at the returned beta
  std::vector<double> trace;          // E per accepted step, first entry = E(beta0)
  int iterations = 0;
  bool converged = false;
};

/// A reconstructed pinch pose paired with the contact-table entry it held.
struct PinchCapture {
  PoseParams pose;
  int contact_pose = 0;  // index into HandModel::contact_poses
};

/// Projected gradient descent with Armijo backtracking on
/// E(beta) = sum over captures and contact pairs of |v_j - v_k|^2.
ShapeResult calibrate_shape(const HandModel& model,
                            const std::vector<PinchCapture>& captures,
                            const VecX& beta0);

double shape_error(const HandModel& model,
                   const std::vector<PinchCapture>& captures, const VecX& beta);
VecX shape_error_gradient(const HandModel& model,
                          const std::vector<PinchCapture>& captures,
                          const VecX& beta);

struct DorsalPosePair {
  Mat3 tracker_rotation;
  Vec3 tracker_translation;
  Mat3 model_rotation;
  Vec3 model_translation;
};

DorsalAlignment solve_dorsal_alignment(const std::vector<DorsalPosePair>& pairs);

/// Session persistence: pose + shape + dorsal results bound to a model hash.
struct CalibrationFile {
  CalibrationResult pose;
  std::optional<ShapeResult> shape;
  std::optional<DorsalAlignment> dorsal;
  std::string model_hash;
};

void save_calibration(const CalibrationFile& calib, const std::string& path);
CalibrationFile load_calibration(const std::string& path);

}  // namespace fsglove
