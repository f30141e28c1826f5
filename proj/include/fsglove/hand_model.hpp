#pragma once

#include <array>
#include <string>
#include <vector>

#include "fsglove/so3.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

/// Box bound on every shape coefficient.
inline constexpr double kBetaBound = 5.0;
inline constexpr int kDefaultShapeDim = 10;

/// One rigid link of the hand skeleton. Offsets and radii are affine in the
/// shape vector: o(beta) = rest_offset + offset_regressor * beta, and
/// similarly for the capsule radius and (where present) the tip offset.
struct LinkDef {
  std::string name;
  int parent = -1;
  Vec3 rest_offset = Vec3::Zero();  // mm, origin in the parent frame
  MatX offset_regressor;            // 3 x B, mm per unit beta
  double rest_radius = 1.0;         // mm
  VecX radius_regressor;            // B, mm per unit beta
  // Capsule endpoint for links without exactly one child (palm and distals).
  bool has_tip = false;
  Vec3 tip_offset = Vec3::Zero();  // mm, in this link's frame
  MatX tip_regressor;              // 3 x B
};

struct SkeletonDef {
  int shape_dim = kDefaultShapeDim;
  std::vector<LinkDef> links;  // kNumLinks entries, parents precede children
};

/// 51 DoF: root rotation + translation plus 15 parent-local joint rotations.
struct PoseParams {
  Mat3 root_rotation = Mat3::Identity();
  Vec3 root_translation = Vec3::Zero();  // mm
  std::array<Mat3, kNumJoints> joint_rotations;  // links 1..15

  PoseParams() { joint_rotations.fill(Mat3::Identity()); }
};

struct LinkTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();  // mm
};

/// Rigid-skinned capsule mesh. Topology (faces, vertex_link) is a function
/// of the skeleton only, never of (theta, beta).
struct HandMesh {
  MatX vertices;           // N x 3, mm
  Eigen::MatrixXi faces;   // M x 3, vertex indices
  std::vector<int> vertex_link;
};

struct ContactPair {
  int j = 0;
  int k = 0;
};

/// A named touch pose: a preset used to seed pose generation plus the vertex
/// pairs declared coincident while the pose is held.
struct ContactPose {
  std::string name;
  int finger = 0;  // 1 = index .. 4 = little (the digit touching the thumb)
  PoseParams pose;
  std::vector<ContactPair> pairs;
};

struct HandModel {
  std::string name = "hand";
  bool mirrored = false;
  SkeletonDef skeleton;
  std::vector<ContactPose> contact_poses;
  std::array<int, kNumFingers> fingertips{};  // tip vertex per distal link

  // Derived capsule template, rebuilt by load_model / make_default_hand.
  // vertex local position = axial * e(beta) + radius(beta) * dir, with e the
  // link's capsule endpoint and dir a fixed unit vector in the link frame.
  struct VertexTemplate {
    int link = 0;
    double axial = 0.0;
    Vec3 dir = Vec3::Zero();
  };
  std::vector<VertexTemplate> vertex_template;
  Eigen::MatrixXi faces;
  std::vector<int> vertex_link;

  int vertex_count() const { return static_cast<int>(vertex_template.size()); }
  void rebuild_template();
};

/// Throws SchemaError when a skeleton invariant is violated (parent order,
/// zero rest offsets, or a bone length / radius that can reach zero inside
/// the beta box, checked by interval arithmetic).
void validate_skeleton(const SkeletonDef& skeleton);

void check_shape(const SkeletonDef& skeleton, const VecX& beta);

std::array<LinkTransform, kNumLinks> forward_kinematics(
    const SkeletonDef& skeleton, const VecX& beta, const PoseParams& pose);

/// d(world link origin)/d(beta), one 3 x B block per link. The rotations of
/// the chain do not depend on beta, so these are exact.
std::vector<MatX> link_origin_jacobians(const SkeletonDef& skeleton,
                                        const PoseParams& pose);

/// Capsule endpoint of a link in its own frame (single child's offset, or
/// the stored tip for the palm and the distal links).
Vec3 link_endpoint(const SkeletonDef& skeleton, int link, const VecX& beta);
MatX link_endpoint_regressor(const SkeletonDef& skeleton, int link);
double link_radius(const SkeletonDef& skeleton, int link, const VecX& beta);

HandMesh build_mesh(const HandModel& model, const VecX& beta,
                    const PoseParams& pose);

Vec3 vertex_position(const HandModel& model, const VecX& beta,
                     const PoseParams& pose, int vertex_index);

/// Exact 3 x B Jacobian of a mesh vertex with respect to beta at fixed pose.
MatX vertex_jacobian_beta(const HandModel& model, const VecX& beta,
                          const PoseParams& pose, int vertex_index);

HandModel make_default_hand();

HandModel load_model(const std::string& path);
void save_model(const HandModel& model, const std::string& path);

/// Hash of the model's canonical serialization; stored in calibration files
/// so results cannot be applied to a different model.
std::string model_content_hash(const HandModel& model);

void write_obj(const HandMesh& mesh, const std::string& path);
HandMesh read_obj(const std::string& path);

/// Links of finger f (0 = thumb .. 4 = little), proximal to distal.
inline std::array<int, 3> finger_links(int finger) {
  return {1 + 3 * finger, 2 + 3 * finger, 3 + 3 * finger};
}

}  // namespace fsglove
