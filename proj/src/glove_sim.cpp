#include "fsglove/glove_sim.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fsglove/errors.hpp"

namespace fsglove {

namespace {

constexpr double kEaseSeconds = 0.5;
constexpr double kGravity = 9.80665;  // m/s^2

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

Mat3 interp_rotation(const Mat3& a, const Mat3& b, double u) {
  return a * exp_so3<double>(u * log_so3<double>(Mat3(a.transpose() * b)));
}

PoseParams interp_pose(const PoseParams& a, const PoseParams& b, double u) {
  PoseParams out;
  out.root_rotation = interp_rotation(a.root_rotation, b.root_rotation, u);
  out.root_translation = (1.0 - u) * a.root_translation + u * b.root_translation;
  for (int j = 0; j < kNumJoints; ++j)
    out.joint_rotations[j] =
        interp_rotation(a.joint_rotations[j], b.joint_rotations[j], u);
  return out;
}

/// Half-normal angle whose mean is `mean_rad`, about a uniform random axis.
Mat3 noise_rotation(Rng& rng, double mean_rad) {
  const Vec3 axis = rng.unit_vector();
  const double angle = std::abs(rng.normal(0.0, mean_rad * std::sqrt(kPi / 2.0)));
  return exp_so3<double>(axis * angle);
}

}  // namespace

SensorExtrinsics SensorExtrinsics::random(Rng& rng, double max_angle_rad) {
  SensorExtrinsics ext;
  ext.world_alignment = rng.rotation_within(max_angle_rad);
  for (int i = 0; i < kNumLinks; ++i)
    ext.installation[i] = rng.rotation_within(max_angle_rad);
  ext.dorsal_rotation = rng.rotation_within(max_angle_rad);
  ext.dorsal_translation =
      Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
  return ext;
}

const char* ref_pose_name(RefPose kind) {
  switch (kind) {
    case RefPose::rest: return "rest";
    case RefPose::x_rot: return "x_rot";
    case RefPose::y_rot: return "y_rot";
    case RefPose::pinch_index: return "pinch_index";
    case RefPose::pinch_middle: return "pinch_middle";
    case RefPose::pinch_ring: return "pinch_ring";
    case RefPose::pinch_little: return "pinch_little";
  }
  return "unknown";
}

bool is_pinch(RefPose kind) {
  return static_cast<int>(kind) >= 3 && static_cast<int>(kind) <= 6;
}

int pinch_finger(RefPose kind) { return static_cast<int>(kind) - 2; }

PoseParams solve_contact_pose(const HandModel& model, int contact_pose_index,
                              const VecX& beta) {
  const ContactPose& cp = model.contact_poses.at(contact_pose_index);
  PoseParams pose = cp.pose;

  std::vector<int> joints;  // links whose joint rotations are adjusted
  for (int l : finger_links(0)) joints.push_back(l);
  for (int l : finger_links(cp.finger)) joints.push_back(l);

  const int n_pairs = static_cast<int>(cp.pairs.size());
  const int n_params = 3 * static_cast<int>(joints.size());

  auto is_ancestor = [&](int anc, int link) {
    for (int i = link; i >= 0; i = model.skeleton.links[i].parent)
      if (i == anc) return true;
    return false;
  };

  auto residual = [&](const PoseParams& p, VecX* g, MatX* jac) {
    const auto fk = forward_kinematics(model.skeleton, beta, p);
    auto vertex = [&](int v) {
      const auto& t = model.vertex_template[v];
      const Vec3 local = t.axial * link_endpoint(model.skeleton, t.link, beta) +
                         link_radius(model.skeleton, t.link, beta) * t.dir;
      return Vec3(fk[t.link].rotation * local + fk[t.link].translation);
    };
    g->resize(3 * n_pairs);
    if (jac) jac->setZero(3 * n_pairs, n_params);
    for (int c = 0; c < n_pairs; ++c) {
      const Vec3 vj = vertex(cp.pairs[c].j);
      const Vec3 vk = vertex(cp.pairs[c].k);
      g->segment<3>(3 * c) = vj - vk;
      if (!jac) continue;
      for (std::size_t q = 0; q < joints.size(); ++q) {
        const int l = joints[q];
        for (int side = 0; side < 2; ++side) {
          const int vtx = side == 0 ? cp.pairs[c].j : cp.pairs[c].k;
          if (!is_ancestor(l, model.vertex_link[vtx])) continue;
          const Vec3 v = side == 0 ? vj : vk;
          const Vec3 p_loc = fk[l].rotation.transpose() * (v - fk[l].translation);
          const double sign = side == 0 ? 1.0 : -1.0;
          for (int a = 0; a < 3; ++a)
            jac->block<3, 1>(3 * c, 3 * static_cast<int>(q) + a) +=
                sign * fk[l].rotation * Vec3::Unit(a).cross(p_loc);
        }
      }
    }
  };

  double lambda = 1e-2;
  VecX g;
  MatX jac;
  residual(pose, &g, &jac);
  for (int iter = 0; iter < 80 && g.norm() > 1e-7; ++iter) {
    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      MatX h = jac.transpose() * jac;
      h.diagonal().array() += lambda;
      const VecX delta = h.ldlt().solve(-jac.transpose() * g);
      PoseParams trial = pose;
      for (std::size_t q = 0; q < joints.size(); ++q) {
        const int l = joints[q];
        trial.joint_rotations[l - 1] =
            trial.joint_rotations[l - 1] *
            exp_so3<double>(delta.segment<3>(3 * static_cast<int>(q)));
      }
      VecX g_trial;
      residual(trial, &g_trial, nullptr);
      if (g_trial.norm() < g.norm()) {
        pose = trial;
        lambda = std::max(lambda * 0.5, 1e-9);
        accepted = true;
        break;
      }
      lambda = std::min(lambda * 10.0, 1e8);
    }
    if (!accepted) break;
    residual(pose, &g, &jac);
  }
  return pose;
}

PoseParams reference_pose(const HandModel& model, RefPose kind,
                          const VecX& beta) {
  PoseParams pose;
  switch (kind) {
    case RefPose::rest:
      return pose;
    case RefPose::x_rot:
      pose.root_rotation = rot_x(-kPi / 2.0);
      return pose;
    case RefPose::y_rot:
      pose.root_rotation = rot_y(kPi / 2.0) * rot_x(-kPi / 2.0);
      return pose;
    default: {
      const int finger = pinch_finger(kind);
      for (std::size_t i = 0; i < model.contact_poses.size(); ++i)
        if (model.contact_poses[i].finger == finger)
          return solve_contact_pose(model, static_cast<int>(i), beta);
      throw SchemaError("model has no contact pose for finger " +
                        std::to_string(finger));
    }
  }
}

ScenarioTrajectory make_scenario_trajectory(
    const HandModel& model, const VecX& beta,
    const std::vector<ScenarioSegment>& segments, double rate_hz) {
  ScenarioTrajectory out;
  out.trajectory.rate_hz = rate_hz;
  out.trajectory.beta = beta;
  const Timestamp period = static_cast<Timestamp>(std::llround(1e9 / rate_hz));
  const int ease_ticks = static_cast<int>(std::lround(kEaseSeconds * rate_hz));

  PoseParams prev;  // rest
  Timestamp tick = 0;
  auto push = [&](const PoseParams& p) {
    out.trajectory.points.push_back({tick * period, p});
    ++tick;
  };

  for (const ScenarioSegment& seg : segments) {
    const PoseParams target = reference_pose(model, seg.kind, beta);
    for (int k = 1; k <= ease_ticks; ++k)
      push(interp_pose(prev, target, smoothstep(double(k) / ease_ticks)));
    const int hold_ticks =
        std::max(1, static_cast<int>(std::lround(seg.hold_s * rate_hz)));
    SegmentSpan span;
    span.kind = seg.kind;
    span.hold_begin = tick * period;
    for (int k = 0; k < hold_ticks; ++k) push(target);
    span.hold_end = (tick - 1) * period;
    out.spans.push_back(span);
    prev = target;
  }
  return out;
}

Trajectory make_reference_trajectory(const HandModel& model, RefPose kind,
                                     const VecX& beta, double duration_s,
                                     double rate_hz) {
  return make_scenario_trajectory(model, beta, {{kind, duration_s}}, rate_hz)
      .trajectory;
}

std::array<std::vector<ImuSample>, kNumLinks> synthesize_imu(
    const Trajectory& trajectory, const SensorExtrinsics& extrinsics,
    const NoiseModel& noise, const HandModel& model) {
  const std::size_t n = trajectory.points.size();
  std::array<std::vector<ImuSample>, kNumLinks> streams;
  for (auto& s : streams) s.reserve(n);

  Rng rng(mix_seed(noise.seed, 1));
  const double dt = 1.0 / trajectory.rate_hz;
  const double dt_min = dt / 60.0;
  const double drift_step =
      noise.drift_rate_deg_per_sqrt_min * std::sqrt(kPi / 2.0 * dt_min);
  const Mat3 a_inv = extrinsics.world_alignment.transpose();

  std::array<Mat3, kNumLinks> prev_world;  // noiseless R^W of the last tick
  std::array<double, kNumLinks> drift_deg{};

  for (std::size_t k = 0; k < n; ++k) {
    const auto fk =
        forward_kinematics(model.skeleton, trajectory.beta, trajectory.points[k].pose);
    for (int i = 0; i < kNumLinks; ++i) {
      const Mat3 world = a_inv * fk[i].rotation * extrinsics.installation[i];
      Vec3 omega = Vec3::Zero();
      if (k > 0)
        omega = log_so3<double>(Mat3(prev_world[i].transpose() * world)) / dt;
      const double rate_deg_s = rad_to_deg(omega.norm());
      const double sigma_deg = rate_deg_s > noise.dynamic_threshold_deg_s
                                   ? noise.sigma_dynamic_deg
                                   : noise.sigma_static_deg;
      const Mat3 jitter = noise_rotation(rng, deg_to_rad(sigma_deg));
      drift_deg[i] += rng.normal(0.0, drift_step);
      const Mat3 drift = rot_z(deg_to_rad(drift_deg[i]));

      ImuSample sample;
      sample.sensor_id = i;
      sample.timestamp = trajectory.points[k].timestamp;
      sample.orientation = matrix_to_quat(Mat3(jitter * world * drift));
      sample.angular_velocity = omega;
      sample.linear_acceleration = world.transpose() * Vec3(0, 0, kGravity);
      streams[i].push_back(sample);
      prev_world[i] = world;
    }
  }
  return streams;
}

std::vector<DorsalSample> synthesize_dorsal(const Trajectory& trajectory,
                                            const SensorExtrinsics& extrinsics,
                                            const NoiseModel& noise) {
  std::vector<DorsalSample> out;
  out.reserve(trajectory.points.size());
  Rng rng(mix_seed(noise.seed, 2));
  for (const TrajectoryPoint& pt : trajectory.points) {
    DorsalSample s;
    s.timestamp = pt.timestamp;
    s.rotation =
        matrix_to_quat(Mat3(extrinsics.dorsal_rotation * pt.pose.root_rotation));
    s.translation = extrinsics.dorsal_rotation * pt.pose.root_translation +
                    extrinsics.dorsal_translation;
    for (int a = 0; a < 3; ++a)
      s.translation[a] += rng.normal(0.0, noise.dorsal_sigma_pos_mm);
    out.push_back(s);
  }
  return out;
}

HingeSweep simulate_hinge(double duration_s, double rate_hz,
                          double max_angle_deg, const NoiseModel& noise) {
  HingeSweep sweep;
  Rng rng(mix_seed(noise.seed, 3));
  const int n = static_cast<int>(std::lround(duration_s * rate_hz));
  const double dt = 1.0 / rate_hz;
  const double sweep_rate = max_angle_deg / duration_s;  // deg/s
  const double sigma_moving = sweep_rate > noise.dynamic_threshold_deg_s
                                  ? noise.sigma_dynamic_deg
                                  : noise.sigma_static_deg;
  for (int k = 0; k < n; ++k) {
    const double angle_deg = sweep_rate * k * dt;
    const Mat3 base = noise_rotation(rng, deg_to_rad(noise.sigma_static_deg));
    const Mat3 moving =
        noise_rotation(rng, deg_to_rad(sigma_moving)) * rot_z(deg_to_rad(angle_deg));
    sweep.reference_deg.push_back(angle_deg);
    sweep.measured_deg.push_back(
        rad_to_deg(twist_about_axis(Mat3(base.transpose() * moving), Vec3::UnitZ().eval())));
  }
  return sweep;
}

MatX synthesize_partial_cloud(const HandMesh& mesh, const Vec3& view_dir,
                              double noise_mm, Rng& rng) {
  const Vec3 centroid = mesh.vertices.colwise().mean().transpose();
  const Vec3 dir = view_dir.normalized();
  std::vector<int> visible;
  for (int v = 0; v < mesh.vertices.rows(); ++v)
    if ((Vec3(mesh.vertices.row(v).transpose()) - centroid).dot(dir) > 0.0)
      visible.push_back(v);
  MatX cloud(static_cast<int>(visible.size()), 3);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    Vec3 p = mesh.vertices.row(visible[i]).transpose();
    for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, noise_mm);
    cloud.row(static_cast<int>(i)) = p.transpose();
  }
  return cloud;
}

}  // namespace fsglove
