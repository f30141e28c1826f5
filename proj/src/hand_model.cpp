#include "fsglove/hand_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fsglove/errors.hpp"

namespace fsglove {

namespace {

// Capsule tessellation: 8 rings of 8 vertices plus the two poles.
constexpr int kRadial = 8;
constexpr int kRings = 8;
constexpr int kVertsPerCapsule = kRings * kRadial + 2;
constexpr int kFacesPerCapsule = 2 * kRadial + (kRings - 1) * 2 * kRadial;

std::vector<int> child_counts(const SkeletonDef& skeleton) {
  std::vector<int> counts(skeleton.links.size(), 0);
  for (std::size_t i = 0; i < skeleton.links.size(); ++i) {
    const int p = skeleton.links[i].parent;
    if (p >= 0) counts[p]++;
  }
  return counts;
}

int single_child(const SkeletonDef& skeleton, int link) {
  for (std::size_t i = 0; i < skeleton.links.size(); ++i)
    if (skeleton.links[i].parent == link) return static_cast<int>(i);
  return -1;
}

// True when some component of o(beta) is bounded away from zero over the box.
bool interval_nonzero(const Vec3& rest, const MatX& regressor) {
  for (int c = 0; c < 3; ++c) {
    double radius = 0.0;
    for (int b = 0; b < regressor.cols(); ++b)
      radius += std::abs(regressor(c, b));
    if (std::abs(rest[c]) - kBetaBound * radius > 0.0) return true;
  }
  return false;
}

}  // namespace

void check_shape(const SkeletonDef& skeleton, const VecX& beta) {
  if (beta.size() != skeleton.shape_dim)
    throw SchemaError("shape vector has wrong dimension");
  for (int b = 0; b < beta.size(); ++b)
    if (std::abs(beta[b]) > kBetaBound)
      throw SchemaError("shape coefficient outside the +-" +
                        std::to_string(kBetaBound) + " box");
}

void validate_skeleton(const SkeletonDef& skeleton) {
  if (skeleton.links.size() != kNumLinks)
    throw SchemaError("skeleton must have exactly 16 links");
  if (skeleton.shape_dim < 1) throw SchemaError("shape_dim must be >= 1");
  const int B = skeleton.shape_dim;
  const auto counts = child_counts(skeleton);
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkDef& link = skeleton.links[i];
    if (i == 0) {
      if (link.parent != -1) throw SchemaError("link 0 must have no parent");
    } else if (link.parent < 0 || link.parent >= i) {
      throw SchemaError("link " + std::to_string(i) +
                        ": parent must precede the link");
    }
    if (link.offset_regressor.rows() != 3 || link.offset_regressor.cols() != B)
      throw SchemaError("link " + std::to_string(i) + ": offset regressor must be 3 x B");
    if (link.radius_regressor.size() != B)
      throw SchemaError("link " + std::to_string(i) + ": radius regressor must have B entries");
    if (i > 0 && link.rest_offset.norm() < 1e-9)
      throw SchemaError("link " + std::to_string(i) + ": rest offset must be nonzero");
    if (i > 0 && !interval_nonzero(link.rest_offset, link.offset_regressor))
      throw SchemaError("link " + std::to_string(i) +
                        ": bone length can vanish inside the beta box");
    double rad_span = 0.0;
    for (int b = 0; b < B; ++b) rad_span += std::abs(link.radius_regressor[b]);
    if (link.rest_radius - kBetaBound * rad_span <= 0.0)
      throw SchemaError("link " + std::to_string(i) +
                        ": capsule radius can vanish inside the beta box");
    if (link.has_tip != (counts[i] != 1))
      throw SchemaError("link " + std::to_string(i) +
                        ": tip must be present exactly when child count != 1");
    if (link.has_tip) {
      if (link.tip_regressor.rows() != 3 || link.tip_regressor.cols() != B)
        throw SchemaError("link " + std::to_string(i) + ": tip regressor must be 3 x B");
      if (link.tip_offset.norm() < 1e-9)
        throw SchemaError("link " + std::to_string(i) + ": tip offset must be nonzero");
      if (!interval_nonzero(link.tip_offset, link.tip_regressor))
        throw SchemaError("link " + std::to_string(i) +
                          ": tip length can vanish inside the beta box");
    }
  }
}

std::array<LinkTransform, kNumLinks> forward_kinematics(
    const SkeletonDef& skeleton, const VecX& beta, const PoseParams& pose) {
  check_shape(skeleton, beta);
  std::array<LinkTransform, kNumLinks> out;
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkDef& link = skeleton.links[i];
    const Vec3 offset = link.rest_offset + link.offset_regressor * beta;
    const Mat3 parent_rot = i == 0 ? pose.root_rotation : out[link.parent].rotation;
    const Vec3 parent_t = i == 0 ? pose.root_translation : out[link.parent].translation;
    out[i].translation = parent_t + parent_rot * offset;
    out[i].rotation = i == 0 ? pose.root_rotation
                             : parent_rot * pose.joint_rotations[i - 1];
  }
  return out;
}

std::vector<MatX> link_origin_jacobians(const SkeletonDef& skeleton,
                                        const PoseParams& pose) {
  const int B = skeleton.shape_dim;
  // Rotations along the chain are independent of beta.
  std::array<Mat3, kNumLinks> rot;
  std::vector<MatX> jac(kNumLinks);
  for (int i = 0; i < kNumLinks; ++i) {
    const LinkDef& link = skeleton.links[i];
    const Mat3 parent_rot = i == 0 ? pose.root_rotation : rot[link.parent];
    rot[i] = i == 0 ? pose.root_rotation : parent_rot * pose.joint_rotations[i - 1];
    jac[i] = (i == 0 ? MatX(MatX::Zero(3, B)) : jac[link.parent]) +
             parent_rot * link.offset_regressor;
  }
  return jac;
}

Vec3 link_endpoint(const SkeletonDef& skeleton, int link, const VecX& beta) {
  const LinkDef& def = skeleton.links[link];
  if (def.has_tip) return def.tip_offset + def.tip_regressor * beta;
  const int child = single_child(skeleton, link);
  const LinkDef& c = skeleton.links[child];
  return c.rest_offset + c.offset_regressor * beta;
}

MatX link_endpoint_regressor(const SkeletonDef& skeleton, int link) {
  const LinkDef& def = skeleton.links[link];
  if (def.has_tip) return def.tip_regressor;
  return skeleton.links[single_child(skeleton, link)].offset_regressor;
}

double link_radius(const SkeletonDef& skeleton, int link, const VecX& beta) {
  const LinkDef& def = skeleton.links[link];
  return def.rest_radius + def.radius_regressor.dot(beta);
}

void HandModel::rebuild_template() {
  validate_skeleton(skeleton);
  const VecX zero = VecX::Zero(skeleton.shape_dim);
  vertex_template.clear();
  vertex_template.reserve(kNumLinks * kVertsPerCapsule);
  vertex_link.clear();
  faces.resize(kNumLinks * kFacesPerCapsule, 3);
  int face_row = 0;

  for (int link = 0; link < kNumLinks; ++link) {
    const Vec3 axis = link_endpoint(skeleton, link, zero).normalized();
    const Vec3 ref = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 n1 = axis.cross(ref).normalized();
    const Vec3 n2 = axis.cross(n1);
    const int base = link * kVertsPerCapsule;

    auto push = [&](double axial, const Vec3& dir) {
      vertex_template.push_back({link, axial, dir});
      vertex_link.push_back(link);
    };

    push(0.0, -axis);  // bottom pole
    // Ring latitudes, bottom cap -> cylinder -> top cap.
    const double cap[2] = {kPi / 3.0, kPi / 6.0};
    const double span[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    for (int ring = 0; ring < kRings; ++ring) {
      for (int k = 0; k < kRadial; ++k) {
        const double theta = 2.0 * kPi * k / kRadial;
        const Vec3 radial = std::cos(theta) * n1 + std::sin(theta) * n2;
        if (ring < 2) {
          push(0.0, std::cos(cap[ring]) * radial - std::sin(cap[ring]) * axis);
        } else if (ring < 6) {
          push(span[ring - 2], radial);
        } else {
          const double el = cap[7 - ring];
          push(1.0, std::cos(el) * radial + std::sin(el) * axis);
        }
      }
    }
    push(1.0, axis);  // top pole

    auto ring_vertex = [&](int ring, int k) {
      return base + 1 + ring * kRadial + (k % kRadial);
    };
    for (int k = 0; k < kRadial; ++k)
      faces.row(face_row++) << base, ring_vertex(0, k + 1), ring_vertex(0, k);
    for (int ring = 0; ring + 1 < kRings; ++ring) {
      for (int k = 0; k < kRadial; ++k) {
        faces.row(face_row++) << ring_vertex(ring, k), ring_vertex(ring, k + 1),
            ring_vertex(ring + 1, k + 1);
        faces.row(face_row++) << ring_vertex(ring, k), ring_vertex(ring + 1, k + 1),
            ring_vertex(ring + 1, k);
      }
    }
    const int top = base + kVertsPerCapsule - 1;
    for (int k = 0; k < kRadial; ++k)
      faces.row(face_row++) << top, ring_vertex(kRings - 1, k), ring_vertex(kRings - 1, k + 1);
  }
}

HandMesh build_mesh(const HandModel& model, const VecX& beta,
                    const PoseParams& pose) {
  const SkeletonDef& skeleton = model.skeleton;
  const auto transforms = forward_kinematics(skeleton, beta, pose);
  std::array<Vec3, kNumLinks> endpoint;
  std::array<double, kNumLinks> radius;
  for (int i = 0; i < kNumLinks; ++i) {
    endpoint[i] = link_endpoint(skeleton, i, beta);
    radius[i] = link_radius(skeleton, i, beta);
  }
  HandMesh mesh;
  mesh.vertices.resize(model.vertex_count(), 3);
  for (int v = 0; v < model.vertex_count(); ++v) {
    const auto& t = model.vertex_template[v];
    const Vec3 local = t.axial * endpoint[t.link] + radius[t.link] * t.dir;
    mesh.vertices.row(v) =
        (transforms[t.link].rotation * local + transforms[t.link].translation)
            .transpose();
  }
  mesh.faces = model.faces;
  mesh.vertex_link = model.vertex_link;
  return mesh;
}

Vec3 vertex_position(const HandModel& model, const VecX& beta,
                     const PoseParams& pose, int vertex_index) {
  if (vertex_index < 0 || vertex_index >= model.vertex_count())
    throw IndexOutOfRange("vertex index " + std::to_string(vertex_index));
  const auto& t = model.vertex_template[vertex_index];
  const auto transforms = forward_kinematics(model.skeleton, beta, pose);
  const Vec3 local = t.axial * link_endpoint(model.skeleton, t.link, beta) +
                     link_radius(model.skeleton, t.link, beta) * t.dir;
  return transforms[t.link].rotation * local + transforms[t.link].translation;
}

MatX vertex_jacobian_beta(const HandModel& model, const VecX& beta,
                          const PoseParams& pose, int vertex_index) {
  if (vertex_index < 0 || vertex_index >= model.vertex_count())
    throw IndexOutOfRange("vertex index " + std::to_string(vertex_index));
  check_shape(model.skeleton, beta);
  const auto& t = model.vertex_template[vertex_index];
  const SkeletonDef& skeleton = model.skeleton;
  const int B = skeleton.shape_dim;

  // Walk the ancestry of the vertex's link accumulating the chain Jacobian;
  // rotations do not depend on beta, so both factors below are exact.
  std::vector<int> chain;
  for (int i = t.link; i >= 0; i = skeleton.links[i].parent) chain.push_back(i);
  MatX origin_jac = MatX::Zero(3, B);
  Mat3 rot = pose.root_rotation;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const int i = *it;
    origin_jac += rot * skeleton.links[i].offset_regressor;
    if (i > 0) rot = rot * pose.joint_rotations[i - 1];
  }
  const MatX local_jac = t.axial * link_endpoint_regressor(skeleton, t.link) +
                         t.dir * skeleton.links[t.link].radius_regressor.transpose();
  return origin_jac + rot * local_jac;
}

// ---------------------------------------------------------------------------
// Default model
// ---------------------------------------------------------------------------

namespace {

struct FingerSpec {
  Vec3 base;        // MCP (thumb: CMC) position on the palm, mm
  Vec3 direction;   // rest pointing direction, unit
  double len[3];    // segment lengths, mm
  double rad[3];    // capsule radii, mm
};

Mat3 flex(double deg) { return rot_x(deg_to_rad(deg)); }

PoseParams pinch_preset(int finger) {
  PoseParams pose;
  auto set = [&](int link, const Mat3& r) { pose.joint_rotations[link - 1] = r; };
  // Thumb opposition, swinging further across the palm for the far fingers.
  const double swing[5] = {0, -38, -52, -62, -70};
  const double sw = swing[finger];
  const auto thumb = finger_links(0);
  set(thumb[0], rot_z(deg_to_rad(sw)) * rot_x(deg_to_rad(-18)));
  set(thumb[1], rot_z(deg_to_rad(sw * 0.3)) * flex(-12));
  set(thumb[2], flex(-10));
  // Target finger curls to meet the thumb; the rest curl slightly.
  const double curl_mcp[5] = {0, -48, -52, -56, -58};
  for (int f = 1; f < kNumFingers; ++f) {
    const auto links = finger_links(f);
    if (f == finger) {
      set(links[0], flex(curl_mcp[f]));
      set(links[1], flex(-45));
      set(links[2], flex(-22));
    } else {
      set(links[0], flex(-16));
      set(links[1], flex(-20));
      set(links[2], flex(-10));
    }
  }
  return pose;
}

}  // namespace

HandModel make_default_hand() {
  const int B = kDefaultShapeDim;
  HandModel model;
  model.name = "fsglove-default";
  model.mirrored = false;
  SkeletonDef& skel = model.skeleton;
  skel.shape_dim = B;
  skel.links.resize(kNumLinks);

  const FingerSpec fingers[kNumFingers] = {
      {{-32, 18, -6}, Vec3(-0.70, 0.65, -0.30).normalized(), {46, 32, 27}, {11.0, 9.5, 8.5}},
      {{-22, 88, 0}, Vec3(-0.12, 0.99, 0).normalized(), {45, 25, 22}, {8.5, 7.5, 6.5}},
      {{-2, 92, 0}, Vec3(0.0, 1.0, 0).normalized(), {50, 29, 23}, {9.0, 7.8, 6.8}},
      {{16, 86, 0}, Vec3(0.10, 0.995, 0).normalized(), {46, 27, 22}, {8.5, 7.5, 6.5}},
      {{32, 76, 0}, Vec3(0.22, 0.975, 0).normalized(), {36, 21, 20}, {7.5, 6.8, 6.0}},
  };

  auto zero3B = MatX::Zero(3, B);
  auto zeroB = VecX::Zero(B);

  // Shape basis. Directions 0..5 move the fingertips and are observable
  // from touch constraints (a globally scaled hand keeps touching itself,
  // so palm scale and tip-radius scale are deliberately not spanned).
  // Directions 6..9 vary girth and palm bulk: they reshape the mesh but
  // leave every fingertip vertex fixed.
  const int kFingerLen0 = 0;   // ..4: per-finger segment + tip lengths
  const int kThumbBase = 5;    // thumb CMC placement scale
  const int kThumbShaft = 6;   // thumb + index proximal/middle radii
  const int kFingerShaft = 7;  // middle/ring/little proximal + middle radii
  const int kShaftTaper = 8;   // proximal radii up, middle radii down
  const int kPalmBulk = 9;     // palm capsule length and radius

  LinkDef& palm = skel.links[0];
  palm.name = "palm";
  palm.parent = -1;
  palm.rest_offset = Vec3::Zero();
  palm.offset_regressor = zero3B;
  palm.rest_radius = 15.0;
  palm.radius_regressor = zeroB;
  palm.radius_regressor[kPalmBulk] = 0.03 * palm.rest_radius;
  palm.has_tip = true;
  palm.tip_offset = Vec3(-2, 87, 0);
  palm.tip_regressor = zero3B;
  palm.tip_regressor.col(kPalmBulk) = 0.05 * palm.tip_offset;

  static const char* const kFingerNames[kNumFingers] = {"thumb", "index", "middle",
                                                        "ring", "little"};
  for (int f = 0; f < kNumFingers; ++f) {
    const FingerSpec& spec = fingers[f];
    const auto links = finger_links(f);
    const double finger_scale = f == 0 ? 0.030 : 0.025;
    for (int s = 0; s < 3; ++s) {
      LinkDef& link = skel.links[links[s]];
      link.name = std::string(kFingerNames[f]) + "_" + std::to_string(s);
      link.parent = s == 0 ? 0 : links[s - 1];
      link.rest_offset = s == 0 ? spec.base : Vec3(spec.direction * spec.len[s - 1]);
      link.offset_regressor = zero3B;
      if (s == 0) {
        if (f == 0) link.offset_regressor.col(kThumbBase) = 0.04 * spec.base;
      } else {
        link.offset_regressor.col(kFingerLen0 + f) = finger_scale * link.rest_offset;
      }
      link.rest_radius = spec.rad[s];
      link.radius_regressor = zeroB;
      if (s < 2) {
        link.radius_regressor[f <= 1 ? kThumbShaft : kFingerShaft] =
            0.03 * spec.rad[s];
        link.radius_regressor[kShaftTaper] = (s == 0 ? 0.02 : -0.02) * spec.rad[s];
      }
      link.has_tip = s == 2;
      if (link.has_tip) {
        link.tip_offset = spec.direction * spec.len[2];
        link.tip_regressor = zero3B;
        link.tip_regressor.col(kFingerLen0 + f) = finger_scale * link.tip_offset;
      }
    }
  }

  model.rebuild_template();

  // Fingertip endpoints: the top pole vertex of each distal capsule.
  for (int f = 0; f < kNumFingers; ++f)
    model.fingertips[f] = finger_links(f)[2] * kVertsPerCapsule + kVertsPerCapsule - 1;

  static const char* const kPinchNames[kNumFingers] = {
      "", "pinch_index", "pinch_middle", "pinch_ring", "pinch_little"};
  for (int f = 1; f < kNumFingers; ++f) {
    ContactPose pose;
    pose.name = kPinchNames[f];
    pose.finger = f;
    pose.pose = pinch_preset(f);
    pose.pairs.push_back({model.fingertips[0], model.fingertips[f]});
    model.contact_poses.push_back(pose);
  }
  return model;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json mat_to_json(const MatX& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

MatX mat_from_json(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw SchemaError("matrix has wrong row count");
  MatX m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw SchemaError("matrix has wrong column count");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json rot_to_json(const Mat3& r) {
  json out = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.push_back(r(i, k));
  return out;
}

Mat3 rot_from_json(const json& j) {
  if (!j.is_array() || j.size() != 9) throw SchemaError("expected a 9-element rotation");
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r(i, k) = j[i * 3 + k].get<double>();
  return r;
}

json pose_to_json(const PoseParams& p) {
  json j;
  j["root_rotation"] = rot_to_json(p.root_rotation);
  j["root_translation"] = vec_to_json(p.root_translation);
  json joints = json::array();
  for (const Mat3& r : p.joint_rotations) joints.push_back(rot_to_json(r));
  j["joint_rotations"] = joints;
  return j;
}

PoseParams pose_from_json(const json& j) {
  PoseParams p;
  p.root_rotation = rot_from_json(j.at("root_rotation"));
  p.root_translation = vec_from_json(j.at("root_translation"));
  const json& joints = j.at("joint_rotations");
  if (joints.size() != kNumJoints) throw SchemaError("expected 15 joint rotations");
  for (int i = 0; i < kNumJoints; ++i)
    p.joint_rotations[i] = rot_from_json(joints[i]);
  return p;
}

json model_to_json(const HandModel& model) {
  json j;
  j["schema"] = "fsglove-hand-model";
  j["version"] = 1;
  j["name"] = model.name;
  j["mirrored"] = model.mirrored;
  j["shape_dim"] = model.skeleton.shape_dim;
  json links = json::array();
  for (const LinkDef& link : model.skeleton.links) {
    json l;
    l["name"] = link.name;
    l["parent"] = link.parent;
    l["offset"] = vec_to_json(link.rest_offset);
    l["offset_regressor"] = mat_to_json(link.offset_regressor);
    l["radius"] = link.rest_radius;
    json rr = json::array();
    for (int b = 0; b < link.radius_regressor.size(); ++b)
      rr.push_back(link.radius_regressor[b]);
    l["radius_regressor"] = rr;
    if (link.has_tip) {
      l["tip_offset"] = vec_to_json(link.tip_offset);
      l["tip_regressor"] = mat_to_json(link.tip_regressor);
    }
    links.push_back(l);
  }
  j["links"] = links;
  json poses = json::array();
  for (const ContactPose& cp : model.contact_poses) {
    json p;
    p["name"] = cp.name;
    p["finger"] = cp.finger;
    p["pose"] = pose_to_json(cp.pose);
    json pairs = json::array();
    for (const ContactPair& pair : cp.pairs) pairs.push_back(json::array({pair.j, pair.k}));
    p["pairs"] = pairs;
    poses.push_back(p);
  }
  j["contact_poses"] = poses;
  j["fingertips"] = model.fingertips;
  return j;
}

HandModel model_from_json(const json& j) {
  if (j.value("schema", "") != "fsglove-hand-model")
    throw SchemaError("not a hand model file");
  if (j.value("version", 0) != 1)
    throw VersionError("unsupported hand model version " +
                       std::to_string(j.value("version", 0)));
  HandModel model;
  model.name = j.value("name", "hand");
  model.mirrored = j.value("mirrored", false);
  const int B = j.at("shape_dim").get<int>();
  model.skeleton.shape_dim = B;
  for (const json& l : j.at("links")) {
    LinkDef link;
    link.name = l.value("name", "");
    link.parent = l.at("parent").get<int>();
    link.rest_offset = vec_from_json(l.at("offset"));
    link.offset_regressor = mat_from_json(l.at("offset_regressor"), 3, B);
    link.rest_radius = l.at("radius").get<double>();
    const json& rr = l.at("radius_regressor");
    if (static_cast<int>(rr.size()) != B)
      throw SchemaError("radius regressor must have B entries");
    link.radius_regressor = VecX(B);
    for (int b = 0; b < B; ++b) link.radius_regressor[b] = rr[b].get<double>();
    if (l.contains("tip_offset")) {
      link.has_tip = true;
      link.tip_offset = vec_from_json(l.at("tip_offset"));
      link.tip_regressor = mat_from_json(l.at("tip_regressor"), 3, B);
    } else {
      link.tip_regressor = MatX::Zero(3, B);
    }
    model.skeleton.links.push_back(link);
  }
  model.rebuild_template();  // validates the skeleton

  for (const json& p : j.at("contact_poses")) {
    ContactPose cp;
    cp.name = p.value("name", "");
    cp.finger = p.at("finger").get<int>();
    cp.pose = pose_from_json(p.at("pose"));
    for (const json& pair : p.at("pairs")) {
      ContactPair c{pair[0].get<int>(), pair[1].get<int>()};
      if (c.j < 0 || c.j >= model.vertex_count() || c.k < 0 ||
          c.k >= model.vertex_count())
        throw SchemaError("contact pair index out of range");
      if (model.vertex_link[c.j] == model.vertex_link[c.k])
        throw SchemaError("contact pair must span two links");
      cp.pairs.push_back(c);
    }
    model.contact_poses.push_back(cp);
  }
  const json& tips = j.at("fingertips");
  if (tips.size() != kNumFingers) throw SchemaError("expected 5 fingertips");
  for (int f = 0; f < kNumFingers; ++f) {
    const int idx = tips[f].get<int>();
    if (idx < 0 || idx >= model.vertex_count())
      throw SchemaError("fingertip index out of range");
    if (model.vertex_link[idx] != finger_links(f)[2])
      throw SchemaError("fingertip " + std::to_string(f) +
                        " does not lie on its distal link");
    model.fingertips[f] = idx;
  }
  return model;
}

}  // namespace

HandModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed model file " + path + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError("model file " + path + ": " + e.what());
  }
}

void save_model(const HandModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file: " + path);
  out << model_to_json(model).dump(2) << "\n";
}

std::string model_content_hash(const HandModel& model) {
  const std::string dump = model_to_json(model).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_obj(const HandMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write OBJ file: " + path);
  char line[128];
  for (int v = 0; v < mesh.vertices.rows(); ++v) {
    std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", mesh.vertices(v, 0),
                  mesh.vertices(v, 1), mesh.vertices(v, 2));
    out << line;
  }
  for (int f = 0; f < mesh.faces.rows(); ++f) {
    std::snprintf(line, sizeof line, "f %d %d %d\n", mesh.faces(f, 0) + 1,
                  mesh.faces(f, 1) + 1, mesh.faces(f, 2) + 1);
    out << line;
  }
}

HandMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read OBJ file: " + path);
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string word;
  std::string linebuf;
  while (std::getline(in, linebuf)) {
    std::istringstream line(linebuf);
    if (!(line >> word)) continue;
    if (word == "v") {
      Vec3 v;
      line >> v.x() >> v.y() >> v.z();
      vertices.push_back(v);
    } else if (word == "f") {
      std::array<int, 3> f{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        line >> tok;
        f[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      faces.push_back(f);
    }
  }
  HandMesh mesh;
  mesh.vertices.resize(static_cast<int>(vertices.size()), 3);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    mesh.vertices.row(static_cast<int>(i)) = vertices[i].transpose();
  mesh.faces.resize(static_cast<int>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i)
    mesh.faces.row(static_cast<int>(i)) << faces[i][0], faces[i][1], faces[i][2];
  return mesh;
}

}  // namespace fsglove
