#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "fsglove/hand_model.hpp"
#include "fsglove/rng.hpp"

using namespace fsglove;

namespace {

PoseParams random_pose(Rng& rng) {
  PoseParams pose;
  pose.root_rotation = rng.rotation();
  pose.root_translation =
      Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
  for (auto& joint : pose.joint_rotations)
    joint = rng.rotation_within(deg_to_rad(40.0));
  return pose;
}

VecX random_beta(Rng& rng, int dim, double max_abs = 3.0) {
  VecX beta(dim);
  for (int b = 0; b < dim; ++b) beta[b] = rng.uniform(-max_abs, max_abs);
  return beta;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/fsglove_test_") + name;
}

}  // namespace

TEST_SUITE_BEGIN("hand_model");

TEST_CASE("default model satisfies the skeleton invariants") {
  const HandModel model = make_default_hand();
  CHECK(model.skeleton.links.size() == kNumLinks);
  CHECK(model.skeleton.shape_dim == kDefaultShapeDim);
  CHECK_NOTHROW(validate_skeleton(model.skeleton));
  CHECK(model.contact_poses.size() == 4);
  for (const ContactPose& cp : model.contact_poses) {
    REQUIRE(cp.pairs.size() >= 1);
    for (const ContactPair& pair : cp.pairs)
      CHECK(model.vertex_link[pair.j] != model.vertex_link[pair.k]);
  }
  for (int f = 0; f < kNumFingers; ++f)
    CHECK(model.vertex_link[model.fingertips[f]] == finger_links(f)[2]);
}

TEST_CASE("identity-pose link origins are cumulative offset sums") {
  const HandModel model = make_default_hand();
  const VecX beta = VecX::Zero(model.skeleton.shape_dim);
  const auto fk = forward_kinematics(model.skeleton, beta, PoseParams{});
  for (int i = 0; i < kNumLinks; ++i) {
    Vec3 expected = Vec3::Zero();
    for (int link = i; link >= 0; link = model.skeleton.links[link].parent)
      expected += model.skeleton.links[link].rest_offset;
    CHECK((fk[i].translation - expected).norm() < 1e-12);
    CHECK((fk[i].rotation - Mat3::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("forward kinematics is equivariant under root motion") {
  const HandModel model = make_default_hand();
  Rng rng(31);
  const VecX beta = random_beta(rng, model.skeleton.shape_dim);
  PoseParams pose = random_pose(rng);

  const auto base = forward_kinematics(model.skeleton, beta, pose);

  PoseParams shifted = pose;
  const Vec3 d(12.5, -3.0, 8.0);
  shifted.root_translation += d;
  const auto moved = forward_kinematics(model.skeleton, beta, shifted);
  for (int i = 0; i < kNumLinks; ++i)
    CHECK((moved[i].translation - base[i].translation - d).norm() < 1e-12);

  PoseParams rotated = pose;
  const Mat3 g = rng.rotation();
  rotated.root_rotation = g * pose.root_rotation;
  rotated.root_translation = g * pose.root_translation;
  const auto spun = forward_kinematics(model.skeleton, beta, rotated);
  for (int i = 0; i < kNumLinks; ++i) {
    CHECK((spun[i].translation - g * base[i].translation).norm() < 1e-9);
    CHECK((spun[i].rotation - g * base[i].rotation).norm() < 1e-9);
  }
}

TEST_CASE("build_mesh is deterministic") {
  const HandModel model = make_default_hand();
  const VecX beta = VecX::Zero(model.skeleton.shape_dim);
  const HandMesh a = build_mesh(model, beta, PoseParams{});
  const HandMesh b = build_mesh(model, beta, PoseParams{});
  REQUIRE(a.vertices.size() == b.vertices.size());
  CHECK(std::memcmp(a.vertices.data(), b.vertices.data(),
                    sizeof(double) * a.vertices.size()) == 0);
}

TEST_CASE("mesh topology does not depend on pose or shape") {
  const HandModel model = make_default_hand();
  Rng rng(37);
  const HandMesh ref = build_mesh(model, VecX::Zero(model.skeleton.shape_dim),
                                  PoseParams{});
  for (int i = 0; i < 100; ++i) {
    const HandMesh mesh = build_mesh(
        model, random_beta(rng, model.skeleton.shape_dim), random_pose(rng));
    REQUIRE(mesh.faces.size() == ref.faces.size());
    CHECK(std::memcmp(mesh.faces.data(), ref.faces.data(),
                      sizeof(int) * mesh.faces.size()) == 0);
    CHECK(mesh.vertex_link == ref.vertex_link);
  }
}

TEST_CASE("uniform length scaling scales fingertip separations") {
  // Model variant with a single shape direction that scales every offset,
  // tip, and radius by 5% per unit; checked against direct scaling.
  HandModel model = make_default_hand();
  for (LinkDef& link : model.skeleton.links) {
    link.offset_regressor.setZero();
    link.offset_regressor.col(0) = 0.05 * link.rest_offset;
    link.radius_regressor.setZero();
    link.radius_regressor[0] = 0.05 * link.rest_radius;
    if (link.has_tip) {
      link.tip_regressor.setZero();
      link.tip_regressor.col(0) = 0.05 * link.tip_offset;
    }
  }
  model.rebuild_template();

  VecX beta = VecX::Zero(model.skeleton.shape_dim);
  beta[0] = 3.0;
  const double scale = 1.0 + 0.05 * beta[0];
  const HandMesh base = build_mesh(model, VecX::Zero(model.skeleton.shape_dim),
                                   PoseParams{});
  const HandMesh scaled = build_mesh(model, beta, PoseParams{});
  for (int a = 0; a < kNumFingers; ++a)
    for (int b = a + 1; b < kNumFingers; ++b) {
      const double d0 = (base.vertices.row(model.fingertips[a]) -
                         base.vertices.row(model.fingertips[b]))
                            .norm();
      const double d1 = (scaled.vertices.row(model.fingertips[a]) -
                         scaled.vertices.row(model.fingertips[b]))
                            .norm();
      CHECK(d1 / d0 == doctest::Approx(scale).epsilon(1e-6));
    }
}

TEST_CASE("vertex_position agrees with build_mesh") {
  const HandModel model = make_default_hand();
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const VecX beta = random_beta(rng, model.skeleton.shape_dim);
    const PoseParams pose = random_pose(rng);
    const int v = static_cast<int>(rng.next_u64() % model.vertex_count());
    const HandMesh mesh = build_mesh(model, beta, pose);
    CHECK((vertex_position(model, beta, pose, v) -
           Vec3(mesh.vertices.row(v).transpose()))
              .norm() < 1e-9);
  }
}

TEST_CASE("root translation moves palm vertices rigidly") {
  const HandModel model = make_default_hand();
  const VecX beta = VecX::Zero(model.skeleton.shape_dim);
  PoseParams pose;
  const Vec3 before = vertex_position(model, beta, pose, 0);
  const Vec3 d(5, -7, 11);
  pose.root_translation = d;
  CHECK((vertex_position(model, beta, pose, 0) - before - d).norm() < 1e-12);
}

TEST_CASE("fingertip vertices cap the distal capsules") {
  const HandModel model = make_default_hand();
  const VecX beta = VecX::Zero(model.skeleton.shape_dim);
  const auto fk = forward_kinematics(model.skeleton, beta, PoseParams{});
  for (int f = 0; f < kNumFingers; ++f) {
    const int link = finger_links(f)[2];
    const Vec3 end = fk[link].rotation * link_endpoint(model.skeleton, link, beta) +
                     fk[link].translation;
    const Vec3 tip = vertex_position(model, beta, PoseParams{}, model.fingertips[f]);
    CHECK((tip - end).norm() ==
          doctest::Approx(link_radius(model.skeleton, link, beta)).epsilon(1e-9));
  }
}

TEST_CASE("shape Jacobian matches central finite differences") {
  const HandModel model = make_default_hand();
  Rng rng(43);
  const double h = 1e-4;
  for (int i = 0; i < 200; ++i) {
    const VecX beta = random_beta(rng, model.skeleton.shape_dim);
    const PoseParams pose = random_pose(rng);
    const int v = static_cast<int>(rng.next_u64() % model.vertex_count());
    const MatX jac = vertex_jacobian_beta(model, beta, pose, v);
    for (int b = 0; b < model.skeleton.shape_dim; ++b) {
      VecX lo = beta, hi = beta;
      lo[b] -= h;
      hi[b] += h;
      const Vec3 fd = (vertex_position(model, hi, pose, v) -
                       vertex_position(model, lo, pose, v)) /
                      (2 * h);
      const double scale = std::max(1.0, fd.norm());
      CHECK((Vec3(jac.col(b)) - fd).norm() / scale < 1e-5);
    }
  }
}

TEST_CASE("zero regressors give a zero Jacobian") {
  HandModel model = make_default_hand();
  for (LinkDef& link : model.skeleton.links) {
    link.offset_regressor.setZero();
    link.radius_regressor.setZero();
    if (link.has_tip) link.tip_regressor.setZero();
  }
  model.rebuild_template();
  Rng rng(47);
  const VecX beta = random_beta(rng, model.skeleton.shape_dim);
  const PoseParams pose = random_pose(rng);
  CHECK(vertex_jacobian_beta(model, beta, pose, 17).norm() == 0.0);
  // palm vertex with no root regressor
  CHECK(vertex_jacobian_beta(model, beta, pose, 0).norm() == 0.0);
}

TEST_CASE("vertex index bounds are enforced") {
  const HandModel model = make_default_hand();
  const VecX beta = VecX::Zero(model.skeleton.shape_dim);
  CHECK_THROWS_AS(vertex_position(model, beta, PoseParams{}, -1), IndexOutOfRange);
  CHECK_THROWS_AS(vertex_position(model, beta, PoseParams{}, model.vertex_count()),
                  IndexOutOfRange);
  CHECK_THROWS_AS(
      vertex_jacobian_beta(model, beta, PoseParams{}, model.vertex_count()),
      IndexOutOfRange);
}

TEST_CASE("beta outside the box is rejected") {
  const HandModel model = make_default_hand();
  VecX beta = VecX::Zero(model.skeleton.shape_dim);
  beta[2] = kBetaBound + 0.5;
  CHECK_THROWS_AS(forward_kinematics(model.skeleton, beta, PoseParams{}),
                  SchemaError);
}

TEST_CASE("save/load round trip preserves the model exactly") {
  const HandModel model = make_default_hand();
  const std::string path = temp_path("model.json");
  save_model(model, path);
  const HandModel loaded = load_model(path);
  CHECK(model_content_hash(loaded) == model_content_hash(model));
  CHECK(loaded.fingertips == model.fingertips);
  CHECK(loaded.skeleton.links[5].rest_offset == model.skeleton.links[5].rest_offset);
  // save the loaded model again: byte-identical files
  const std::string path2 = temp_path("model2.json");
  save_model(loaded, path2);
  std::ifstream a(path), b(path2);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("shipped default model fixture loads and matches the built-in") {
  const HandModel fixture =
      load_model(std::string(FSGLOVE_SOURCE_DIR) + "/models/default_hand.json");
  CHECK(model_content_hash(fixture) == model_content_hash(make_default_hand()));
}

TEST_CASE("schema violations are rejected") {
  const HandModel model = make_default_hand();
  const std::string path = temp_path("model_bad.json");

  SUBCASE("parent does not precede child") {
    HandModel bad = model;
    bad.skeleton.links[4].parent = 7;
    save_model(bad, path);
    CHECK_THROWS_AS(load_model(path), SchemaError);
  }
  SUBCASE("bone length can vanish inside the beta box") {
    HandModel bad = model;
    bad.skeleton.links[2].offset_regressor.col(0) =
        bad.skeleton.links[2].rest_offset;  // 100% per unit beta
    save_model(bad, path);
    CHECK_THROWS_AS(load_model(path), SchemaError);
  }
  SUBCASE("unknown version") {
    std::ofstream out(path);
    out << R"({"schema":"fsglove-hand-model","version":9})";
    out.close();
    CHECK_THROWS_AS(load_model(path), VersionError);
  }
  SUBCASE("malformed json") {
    std::ofstream out(path);
    out << "{ not json";
    out.close();
    CHECK_THROWS_AS(load_model(path), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ParseError);
  }
}

TEST_CASE("OBJ export and import round trip") {
  const HandModel model = make_default_hand();
  const HandMesh mesh =
      build_mesh(model, VecX::Zero(model.skeleton.shape_dim), PoseParams{});
  const std::string path = temp_path("mesh.obj");
  write_obj(mesh, path);
  const HandMesh back = read_obj(path);
  REQUIRE(back.vertices.rows() == mesh.vertices.rows());
  REQUIRE(back.faces.rows() == mesh.faces.rows());
  CHECK((back.vertices - mesh.vertices).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::memcmp(back.faces.data(), mesh.faces.data(),
                    sizeof(int) * mesh.faces.size()) == 0);
}

TEST_SUITE_END();
