#include "fsglove/diffhcal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fsglove/errors.hpp"

namespace fsglove {

std::pair<Mat3, double> aggregate_static_segment(
    const std::vector<ImuSample>& samples) {
  if (static_cast<int>(samples.size()) < kMinStaticSamples)
    throw TooFewSamples("static segment needs >= " +
                        std::to_string(kMinStaticSamples) + " samples, got " +
                        std::to_string(samples.size()));
  std::vector<Mat3> rotations;
  rotations.reserve(samples.size());
  for (const ImuSample& s : samples)
    rotations.push_back(quat_to_matrix(s.orientation));
  const Mat3 mean = average_rotation(rotations);
  double spread = 0.0;
  for (const Mat3& r : rotations)
    spread = std::max(spread, geodesic_angle(r, mean));
  const double spread_deg = rad_to_deg(spread);
  if (spread_deg >= kMaxStaticSpreadDeg)
    throw ExcessiveSpread("segment moved: spread " + std::to_string(spread_deg) +
                          " deg");
  return {mean, spread_deg};
}

CalibrationResult solve_alignment(
    const std::vector<ReferenceCapture>& captures,
    const std::vector<std::array<Mat3, kNumLinks>>& virtual_refs) {
  if (captures.size() != virtual_refs.size())
    throw InsufficientPoses("captures and virtual references differ in count");
  std::set<RefPose> kinds;
  for (const ReferenceCapture& c : captures) kinds.insert(c.kind);
  if (kinds.size() < 2)
    throw InsufficientPoses("need >= 2 distinct reference pose kinds, got " +
                            std::to_string(kinds.size()));

  const int K = static_cast<int>(captures.size());
  constexpr double kTolRad = 1e-10;
  constexpr int kMaxIterations = 200;

  CalibrationResult result;
  auto objective = [&]() {
    double sum = 0.0;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < kNumLinks; ++i)
        sum += (virtual_refs[k][i] * result.installation[i] -
                result.world_alignment * captures[k].mean_world[i])
                   .squaredNorm();
    return sum;
  };
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // A step: chordal mean of all R^M_i C_i (R^W_i)^T estimates.
    Mat3 a_sum = Mat3::Zero();
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < kNumLinks; ++i)
        a_sum += virtual_refs[k][i] * result.installation[i] *
                 captures[k].mean_world[i].transpose();
    const Mat3 a_new = project_to_so3(a_sum);

    // C step: per sensor, the rotation nearest all (R^M)^T A R^W.
    double change = geodesic_angle(result.world_alignment, a_new);
    result.world_alignment = a_new;
    for (int i = 0; i < kNumLinks; ++i) {
      Mat3 c_sum = Mat3::Zero();
      for (int k = 0; k < K; ++k)
        c_sum += virtual_refs[k][i].transpose() * a_new * captures[k].mean_world[i];
      const Mat3 c_new = project_to_so3(c_sum);
      change = std::max(change, geodesic_angle(result.installation[i], c_new));
      result.installation[i] = c_new;
    }
    result.iterations = iter + 1;
    result.objective_trace.push_back(objective());
    if (change < kTolRad) {
      result.converged = true;
      break;
    }
  }

  result.residuals_deg.resize(kNumLinks, K);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < kNumLinks; ++i)
      result.residuals_deg(i, k) = rad_to_deg(geodesic_angle(
          Mat3(virtual_refs[k][i] * result.installation[i]),
          Mat3(result.world_alignment * captures[k].mean_world[i])));
  return result;
}

PoseParams reconstruct_pose(const FrameSet& frame,
                            const CalibrationResult& calib,
                            const DorsalAlignment& dorsal,
                            const SkeletonDef& skeleton) {
  std::vector<int> missing;
  for (int i = 0; i < kNumLinks; ++i)
    if (!frame.imu[i]) missing.push_back(i);
  if (!missing.empty()) throw MissingSensor(missing);

  std::array<Mat3, kNumLinks> link_rot;
  for (int i = 0; i < kNumLinks; ++i)
    link_rot[i] =
        corrected_link_rotation(quat_to_matrix(frame.imu[i]->orientation),
                                calib.world_alignment, calib.installation[i]);

  PoseParams pose;
  pose.root_rotation = project_to_so3(link_rot[0]);
  if (frame.dorsal)
    pose.root_translation =
        dorsal.rotation * frame.dorsal->translation + dorsal.translation;
  for (int i = 1; i < kNumLinks; ++i)
    pose.joint_rotations[i - 1] = project_to_so3(
        joint_rotation(link_rot[i], link_rot[skeleton.links[i].parent]));
  return pose;
}

double shape_error(const HandModel& model,
                   const std::vector<PinchCapture>& captures,
                   const VecX& beta) {
  double e = 0.0;
  for (const PinchCapture& cap : captures) {
    const ContactPose& cp = model.contact_poses.at(cap.contact_pose);
    for (const ContactPair& pair : cp.pairs) {
      const Vec3 diff = vertex_position(model, beta, cap.pose, pair.j) -
                        vertex_position(model, beta, cap.pose, pair.k);
      e += diff.squaredNorm();
    }
  }
  return e;
}

VecX shape_error_gradient(const HandModel& model,
                          const std::vector<PinchCapture>& captures,
                          const VecX& beta) {
  VecX grad = VecX::Zero(model.skeleton.shape_dim);
  for (const PinchCapture& cap : captures) {
    const ContactPose& cp = model.contact_poses.at(cap.contact_pose);
    for (const ContactPair& pair : cp.pairs) {
      const Vec3 diff = vertex_position(model, beta, cap.pose, pair.j) -
                        vertex_position(model, beta, cap.pose, pair.k);
      const MatX jac = vertex_jacobian_beta(model, beta, cap.pose, pair.j) -
                       vertex_jacobian_beta(model, beta, cap.pose, pair.k);
      grad += 2.0 * jac.transpose() * diff;
    }
  }
  return grad;
}

ShapeResult calibrate_shape(const HandModel& model,
                            const std::vector<PinchCapture>& captures,
                            const VecX& beta0) {
  if (captures.empty()) throw NoCaptures("shape calibration needs >= 1 pinch capture");
  check_shape(model.skeleton, beta0);

  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  constexpr double kGradTol = 1e-8;
  constexpr int kMaxIterations = 500;

  auto clip = [&](VecX b) {
    for (int i = 0; i < b.size(); ++i)
      b[i] = std::clamp(b[i], -kBetaBound, kBetaBound);
    return b;
  };

  ShapeResult result;
  result.beta = clip(beta0);
  double e = shape_error(model, captures, result.beta);
  result.trace.push_back(e);

  double step = 0.0;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    result.iterations = iter + 1;
    const VecX grad = shape_error_gradient(model, captures, result.beta);
    const double gnorm = grad.norm();
    if (gnorm < kGradTol) {
      result.converged = true;
      break;
    }
    double alpha = iter == 0 ? 1.0 / (1.0 + gnorm) : step * 2.0;
    bool accepted = false;
    while (alpha > 1e-18) {
      const VecX trial = clip(result.beta - alpha * grad);
      const double e_trial = shape_error(model, captures, trial);
      const double decrease = grad.dot(result.beta - trial);
      if (e_trial <= e - kArmijo * decrease && e_trial <= e) {
        result.beta = trial;
        e = e_trial;
        result.trace.push_back(e);
        step = alpha;
        accepted = true;
        break;
      }
      alpha *= kShrink;
    }
    if (!accepted) break;  // line search exhausted (box corner or noise floor)
  }
  result.e_shape = e;
  return result;
}

DorsalAlignment solve_dorsal_alignment(const std::vector<DorsalPosePair>& pairs) {
  if (pairs.size() < 2)
    throw InsufficientPoses("dorsal alignment needs >= 2 pose pairs");
  bool distinct = false;
  for (std::size_t a = 0; a + 1 < pairs.size() && !distinct; ++a)
    for (std::size_t b = a + 1; b < pairs.size() && !distinct; ++b)
      if (geodesic_angle(pairs[a].tracker_rotation, pairs[b].tracker_rotation) > 1e-9)
        distinct = true;
  if (!distinct)
    throw InsufficientPoses("dorsal alignment needs distinct rotations");

  std::vector<Mat3> estimates;
  estimates.reserve(pairs.size());
  for (const DorsalPosePair& p : pairs)
    estimates.push_back(p.model_rotation * p.tracker_rotation.transpose());
  DorsalAlignment out;
  out.rotation = average_rotation(estimates);
  Vec3 sum = Vec3::Zero();
  for (const DorsalPosePair& p : pairs)
    sum += p.model_translation - out.rotation * p.tracker_translation;
  out.translation = sum / static_cast<double>(pairs.size());
  return out;
}

// ---------------------------------------------------------------------------
// Session persistence
// ---------------------------------------------------------------------------

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

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

void save_calibration(const CalibrationFile& calib, const std::string& path) {
  json j;
  j["schema"] = "fsglove-calibration";
  j["version"] = 1;
  j["model_hash"] = calib.model_hash;
  json pose;
  pose["world_alignment"] = rot_to_json(calib.pose.world_alignment);
  json inst = json::array();
  for (const Mat3& c : calib.pose.installation) inst.push_back(rot_to_json(c));
  pose["installation"] = inst;
  json residuals = json::array();
  for (int i = 0; i < calib.pose.residuals_deg.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < calib.pose.residuals_deg.cols(); ++k)
      row.push_back(calib.pose.residuals_deg(i, k));
    residuals.push_back(row);
  }
  pose["residuals_deg"] = residuals;
  pose["iterations"] = calib.pose.iterations;
  pose["converged"] = calib.pose.converged;
  j["pose"] = pose;
  if (calib.shape) {
    json shape;
    shape["beta"] = std::vector<double>(calib.shape->beta.begin(),
                                        calib.shape->beta.end());
    shape["e_shape_mm2"] = calib.shape->e_shape;
    shape["trace"] = calib.shape->trace;
    shape["iterations"] = calib.shape->iterations;
    shape["converged"] = calib.shape->converged;
    j["shape"] = shape;
  }
  if (calib.dorsal) {
    json dorsal;
    dorsal["rotation"] = rot_to_json(calib.dorsal->rotation);
    dorsal["translation"] = vec_to_json(calib.dorsal->translation);
    j["dorsal"] = dorsal;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calibration: " + path);
  out << j.dump(2) << "\n";
}

CalibrationFile load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read calibration: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed calibration file " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "fsglove-calibration")
    throw ParseError("not a calibration file: " + path);
  if (j.value("version", 0) != 1)
    throw VersionError("unsupported calibration version");
  CalibrationFile calib;
  calib.model_hash = j.value("model_hash", "");
  const json& pose = j.at("pose");
  calib.pose.world_alignment = rot_from_json(pose.at("world_alignment"));
  for (int i = 0; i < kNumLinks; ++i)
    calib.pose.installation[i] = rot_from_json(pose.at("installation")[i]);
  const json& residuals = pose.at("residuals_deg");
  if (!residuals.empty()) {
    calib.pose.residuals_deg.resize(residuals.size(), residuals[0].size());
    for (std::size_t i = 0; i < residuals.size(); ++i)
      for (std::size_t k = 0; k < residuals[i].size(); ++k)
        calib.pose.residuals_deg(static_cast<int>(i), static_cast<int>(k)) =
            residuals[i][k].get<double>();
  }
  calib.pose.iterations = pose.value("iterations", 0);
  calib.pose.converged = pose.value("converged", false);
  if (j.contains("shape")) {
    ShapeResult shape;
    const auto beta = j["shape"].at("beta").get<std::vector<double>>();
    shape.beta = Eigen::Map<const VecX>(beta.data(), static_cast<int>(beta.size()));
    shape.e_shape = j["shape"].value("e_shape_mm2", 0.0);
    shape.trace = j["shape"].value("trace", std::vector<double>{});
    shape.iterations = j["shape"].value("iterations", 0);
    shape.converged = j["shape"].value("converged", false);
    calib.shape = shape;
  }
  if (j.contains("dorsal")) {
    DorsalAlignment dorsal;
    dorsal.rotation = rot_from_json(j["dorsal"].at("rotation"));
    dorsal.translation = vec_from_json(j["dorsal"].at("translation"));
    calib.dorsal = dorsal;
  }
  return calib;
}

}  // namespace fsglove
