#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsglove/metrics.hpp"
#include "fsglove/session.hpp"

using namespace fsglove;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

json rot_to_json(const Mat3& r) {
  json out = json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out.push_back(r(i, k));
  return out;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

HandModel resolve_model(const std::string& path) {
  if (path.empty()) return make_default_hand();
  if (!std::filesystem::exists(path))
    throw ParseError("model file not found: " + path);
  return load_model(path);
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

Timestamp packet_timestamp(const AnyPacket& packet) {
  if (const auto* imu = std::get_if<ImuSample>(&packet)) return imu->timestamp;
  if (const auto* dorsal = std::get_if<DorsalSample>(&packet))
    return dorsal->timestamp;
  if (const auto* marker = std::get_if<SegmentMarker>(&packet))
    return marker->timestamp;
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string model_path;
  std::string config_path;
  std::string output = "session.fsgr";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

Scenario resolve_scenario(const SimulateArgs& args, const HandModel& model) {
  if (args.config_path.empty())
    return default_calibration_scenario(args.seed_set ? args.seed : 0);
  if (!std::filesystem::exists(args.config_path))
    throw ParseError("scenario file not found: " + args.config_path);
  return load_scenario(args.config_path, model,
                       args.seed_set ? std::optional<std::uint64_t>(args.seed)
                                     : std::nullopt);
}

int run_simulate(const SimulateArgs& args) {
  const HandModel model = resolve_model(args.model_path);
  const Scenario scenario = resolve_scenario(args, model);
  const SimulationOutput sim = simulate_scenario(model, scenario);
  write_recording(args.output, kSessionStreamCount, sim.frames);
  save_sidecar(scenario, model_content_hash(model), args.output + ".truth.json");
  std::printf("wrote %s: %zu packets, %zu segments, %.1f s at %.0f Hz\n",
              args.output.c_str(), sim.frames.size(), sim.scenario.spans.size(),
              sim.scenario.trajectory.points.size() / scenario.rate_hz,
              scenario.rate_hz);
  return 0;
}

// ---------------------------------------------------------------------------
// serve / record / replay
// ---------------------------------------------------------------------------

int run_serve(const SimulateArgs& args, int port, const std::string& speed,
              int max_clients) {
  const HandModel model = resolve_model(args.model_path);
  const Scenario scenario = resolve_scenario(args, model);
  const SimulationOutput sim = simulate_scenario(model, scenario);

  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw BindError("socket() failed");
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(listener);
    throw BindError("cannot bind port " + std::to_string(port));
  }
  if (::listen(listener, 8) != 0) {
    ::close(listener);
    throw BindError("listen() failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  std::printf("listening on port %d\n", ntohs(addr.sin_port));
  std::fflush(stdout);

  const bool realtime = speed == "realtime";
  std::vector<Timestamp> stamps;
  stamps.reserve(sim.frames.size());
  for (const auto& frame : sim.frames)
    stamps.push_back(
        packet_timestamp(decode_packet(frame.data(), frame.size())));

  std::vector<std::thread> workers;
  std::atomic<int> served{0};
  for (int c = 0; max_clients <= 0 || c < max_clients; ++c) {
    const int client = ::accept(listener, nullptr, nullptr);
    if (client < 0) break;
    workers.emplace_back([client, &sim, &stamps, realtime, &served] {
      Timestamp prev = 0;
      bool have_prev = false;
      for (std::size_t k = 0; k < sim.frames.size(); ++k) {
        if (realtime && have_prev && stamps[k] > prev)
          std::this_thread::sleep_for(std::chrono::nanoseconds(stamps[k] - prev));
        if (stamps[k] > 0) {
          prev = stamps[k];
          have_prev = true;
        }
        const auto& frame = sim.frames[k];
        std::size_t off = 0;
        while (off < frame.size()) {
          const ssize_t n =
              ::send(client, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
          if (n <= 0) {
            ::close(client);
            return;  // client went away; the server carries on
          }
          off += static_cast<std::size_t>(n);
        }
      }
      ::close(client);
      served++;
    });
  }
  for (auto& w : workers) w.join();
  ::close(listener);
  std::printf("served %d client(s)\n", served.load());
  return 0;
}

int run_record(const std::string& host, int port, const std::string& output) {
  const int sock = ::socket(AF_INET, SOCK_STREAM, 0);
  if (sock < 0) throw IoError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(sock);
    throw IoError("bad host address: " + host);
  }
  if (::connect(sock, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(sock);
    throw IoError("cannot connect to " + host + ":" + std::to_string(port));
  }

  const auto recv_start = std::chrono::steady_clock::now();
  std::vector<std::uint8_t> buffer;
  std::uint8_t chunk[4096];
  for (;;) {
    const ssize_t n = ::recv(sock, chunk, sizeof chunk, 0);
    if (n < 0) {
      ::close(sock);
      throw IoError("receive error");
    }
    if (n == 0) break;
    buffer.insert(buffer.end(), chunk, chunk + n);
  }
  ::close(sock);
  const double recv_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - recv_start)
          .count();

  // validate and reframe
  std::vector<std::vector<std::uint8_t>> frames;
  std::size_t offset = 0;
  while (offset < buffer.size()) {
    const std::size_t frame = packet_frame_size(buffer.data() + offset,
                                                buffer.size() - offset);
    if (frame == 0 || offset + frame > buffer.size())
      throw CorruptFile("stream truncated mid-packet", offset);
    decode_packet(buffer.data() + offset, frame);  // CRC check
    frames.emplace_back(buffer.begin() + static_cast<std::ptrdiff_t>(offset),
                        buffer.begin() + static_cast<std::ptrdiff_t>(offset + frame));
    offset += frame;
  }
  write_recording(output, kSessionStreamCount, frames);
  std::printf("recorded %zu packets to %s (%.2f s on the wire, %.0f packets/s)\n",
              frames.size(), output.c_str(), recv_seconds,
              frames.empty() ? 0.0 : frames.size() / std::max(recv_seconds, 1e-9));
  return 0;
}

int run_replay(const std::string& input, const std::string& output,
               const std::string& speed) {
  const Recording rec = read_recording(input);
  if (speed == "realtime") {
    Timestamp prev = 0;
    bool have_prev = false;
    for (std::size_t k = 0; k < rec.packets.size(); ++k) {
      const Timestamp t = packet_timestamp(rec.packets[k]);
      if (have_prev && t > prev)
        std::this_thread::sleep_for(std::chrono::nanoseconds(t - prev));
      if (t > 0) {
        prev = t;
        have_prev = true;
      }
    }
  }
  if (!output.empty()) write_recording(output, rec.stream_count, rec.frames);
  std::printf("replayed %zu packets%s\n", rec.frames.size(),
              output.empty() ? "" : (" to " + output).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate / reconstruct
// ---------------------------------------------------------------------------

int run_calibrate(const std::string& recording_path,
                  const std::string& model_path, const std::string& output) {
  const HandModel model = resolve_model(model_path);
  const Recording rec = read_recording(recording_path);
  const CalibrationReport report = calibrate_recording(rec, model);
  save_calibration(report.file, output);

  const CalibrationResult& pose = report.file.pose;
  std::printf("pose calibration: %d iterations, %s\n", pose.iterations,
              pose.converged ? "converged" : "iteration cap reached");
  std::printf("per-sensor residuals (deg):\n");
  for (int i = 0; i < kNumLinks; ++i) {
    std::printf("  sensor %2d:", i);
    for (int k = 0; k < pose.residuals_deg.cols(); ++k)
      std::printf(" %7.4f", pose.residuals_deg(i, k));
    std::printf("\n");
  }
  if (report.shape_skipped)
    std::printf("shape skipped: recording has no pinch segments\n");
  else
    std::printf("shape: E = %.6g mm^2 after %d iterations\n",
                report.file.shape->e_shape, report.file.shape->iterations);
  if (report.file.dorsal)
    std::printf("dorsal alignment solved from %zu reference holds\n",
                std::count_if(report.windows.begin(), report.windows.end(),
                              [](const HoldWindow& w) { return !is_pinch(w.kind); }));
  std::printf("wrote %s\n", output.c_str());
  return 0;
}

int run_reconstruct(const std::string& recording_path,
                    const std::string& calibration_path,
                    const std::string& model_path, const std::string& output,
                    const std::string& obj_dir, int every,
                    Timestamp window_ns) {
  const HandModel model = resolve_model(model_path);
  const Recording rec = read_recording(recording_path);
  const CalibrationFile calib = load_calibration(calibration_path);
  const ReconstructionResult result =
      reconstruct_recording(rec, calib, model, window_ns);

  json j;
  j["schema"] = "fsglove-poses";
  j["version"] = 1;
  j["frames"] = json::array();
  for (const auto& [t, pose] : result.poses) {
    json frame;
    frame["timestamp_ns"] = t;
    frame["root_rotation"] = rot_to_json(pose.root_rotation);
    frame["root_translation_mm"] = vec_to_json(pose.root_translation);
    json joints = json::array();
    for (const Mat3& joint : pose.joint_rotations) joints.push_back(rot_to_json(joint));
    frame["joint_rotations"] = joints;
    j["frames"].push_back(std::move(frame));
  }
  json sync;
  sync["emitted"] = result.sync.emitted;
  sync["dropped_imu"] = result.sync.dropped_imu;
  sync["dropped_dorsal"] = result.sync.dropped_dorsal;
  j["sync"] = sync;
  write_json(j, output);

  if (!obj_dir.empty()) {
    std::filesystem::create_directories(obj_dir);
    const VecX beta = calib.shape ? calib.shape->beta
                                  : VecX::Zero(model.skeleton.shape_dim);
    int exported = 0;
    for (std::size_t k = 0; k < result.poses.size(); k += every) {
      char name[64];
      std::snprintf(name, sizeof name, "frame_%06zu.obj", k);
      write_obj(build_mesh(model, beta, result.poses[k].second),
                (std::filesystem::path(obj_dir) / name).string());
      ++exported;
    }
    std::printf("exported %d meshes to %s\n", exported, obj_dir.c_str());
  }
  std::printf("reconstructed %zu frames to %s\n", result.poses.size(),
              output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int run_evaluate_joint(std::uint64_t seed, double duration_s, double rate_hz,
                       double max_angle_deg, double sigma_static,
                       double sigma_dynamic, const std::string& output,
                       const std::string& csv) {
  NoiseModel noise;
  noise.seed = seed;
  noise.sigma_static_deg = sigma_static;
  noise.sigma_dynamic_deg = sigma_dynamic;
  noise.drift_rate_deg_per_sqrt_min = 0.0;
  const HingeSweep sweep = simulate_hinge(duration_s, rate_hz, max_angle_deg, noise);
  const JointErrorStats stats =
      joint_error_stats(sweep.measured_deg, sweep.reference_deg);
  json j;
  j["schema"] = "fsglove-report-joint";
  j["version"] = 1;
  j["seed"] = seed;
  j["bias_deg"] = stats.bias_deg;
  j["std_deg"] = stats.std_deg;
  j["non_linearity_pct"] = stats.non_linearity_pct;
  j["samples"] = sweep.reference_deg.size();
  if (!output.empty()) write_json(j, output);
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot write " + csv);
    out << "reference_deg,measured_deg,residual_deg\n";
    char line[96];
    for (std::size_t k = 0; k < sweep.reference_deg.size(); ++k) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n",
                    sweep.reference_deg[k], sweep.measured_deg[k],
                    stats.residuals_deg[k]);
      out << line;
    }
  }
  std::printf("joint: bias %.3f deg, std %.3f deg, non-linearity %.3f %%\n",
              stats.bias_deg, stats.std_deg, stats.non_linearity_pct);
  return 0;
}

int run_evaluate_shape(const std::string& model_path,
                       const std::string& sidecar_path,
                       const std::string& calibration_path, std::uint64_t seed,
                       const std::string& output) {
  const HandModel model = resolve_model(model_path);
  const Scenario truth = load_sidecar(sidecar_path);
  const CalibrationFile calib = load_calibration(calibration_path);
  if (!calib.shape) throw ParseError("calibration file has no shape result");

  Rng rng(mix_seed(seed, 40));
  json poses = json::array();
  double total_rms = 0.0;
  int count = 0;
  for (const ScenarioSegment& seg : truth.segments) {
    if (!is_pinch(seg.kind)) continue;
    const PoseParams pose = reference_pose(model, seg.kind, truth.beta);
    const HandMesh true_mesh = build_mesh(model, truth.beta, pose);
    const MatX cloud =
        synthesize_partial_cloud(true_mesh, Vec3(0, 0, 1), 0.5, rng);
    const HandMesh fit_mesh = build_mesh(model, calib.shape->beta, pose);
    const double e_sr = chamfer_unidirectional(cloud, fit_mesh.vertices);
    const double rms = std::sqrt(e_sr);
    json p;
    p["pose"] = ref_pose_name(seg.kind);
    p["e_sr_mm2"] = e_sr;
    p["rms_mm"] = rms;
    p["cloud_points"] = cloud.rows();
    poses.push_back(p);
    total_rms += rms;
    ++count;
    std::printf("shape %s: E_sr %.4f mm^2, RMS %.4f mm\n",
                ref_pose_name(seg.kind), e_sr, rms);
  }
  if (count == 0) throw ParseError("sidecar has no pinch segments");
  json j;
  j["schema"] = "fsglove-report-shape";
  j["version"] = 1;
  j["poses"] = poses;
  j["mean_rms_mm"] = total_rms / count;
  if (!output.empty()) write_json(j, output);
  return 0;
}

int run_evaluate_pinch(const std::string& recording_path,
                       const std::string& calibration_path,
                       const std::string& model_path,
                       const std::string& output) {
  const HandModel model = resolve_model(model_path);
  const Recording rec = read_recording(recording_path);
  const CalibrationFile calib = load_calibration(calibration_path);
  const ReconstructionResult recon = reconstruct_recording(rec, calib, model);
  const VecX beta =
      calib.shape ? calib.shape->beta : VecX::Zero(model.skeleton.shape_dim);

  const SessionStreams streams = split_recording(rec);
  const auto windows = hold_windows(streams.markers);
  json fingers = json::array();
  double total = 0.0;
  int count = 0;
  static const char* const names[5] = {"", "index", "middle", "ring", "little"};
  for (const HoldWindow& w : windows) {
    if (!is_pinch(w.kind)) continue;
    std::vector<PoseParams> stream;
    for (const auto& [t, pose] : recon.poses)
      if (t >= w.begin && t <= w.end) stream.push_back(pose);
    const int finger = pinch_finger(w.kind);
    const double mean = pinch_distance(stream, model, beta, finger);
    json f;
    f["finger"] = names[finger];
    f["mean_mm"] = mean;
    f["frames"] = stream.size();
    fingers.push_back(f);
    total += mean;
    ++count;
    std::printf("pinch %s: %.3f mm over %zu frames\n", names[finger], mean,
                stream.size());
  }
  if (count == 0) throw ParseError("recording has no pinch segments");
  json j;
  j["schema"] = "fsglove-report-pinch";
  j["version"] = 1;
  j["fingers"] = fingers;
  j["average_mm"] = total / count;
  if (!output.empty()) write_json(j, output);
  std::printf("pinch average: %.3f mm\n", total / count);
  return 0;
}

int run_evaluate_interaction(const std::string& recording_path,
                             const std::string& calibration_path,
                             const std::string& model_path,
                             const std::string& object_path,
                             const std::string& output) {
  const HandModel model = resolve_model(model_path);
  const Recording rec = read_recording(recording_path);
  const CalibrationFile calib = load_calibration(calibration_path);
  const HandMesh object = read_obj(object_path);
  if (object.faces.rows() == 0) throw ParseError("object mesh has no faces");
  const ReconstructionResult recon = reconstruct_recording(rec, calib, model);
  const VecX beta =
      calib.shape ? calib.shape->beta : VecX::Zero(model.skeleton.shape_dim);

  const MeshDistanceQuery query(object);
  json fingers = json::array();
  static const char* const names[5] = {"thumb", "index", "middle", "ring",
                                       "little"};
  for (int f = 0; f < kNumFingers; ++f) {
    double sum = 0.0, sq = 0.0;
    for (const auto& [t, pose] : recon.poses) {
      const double d =
          query.distance(vertex_position(model, beta, pose, model.fingertips[f]));
      sum += d;
      sq += d * d;
    }
    const double n = static_cast<double>(recon.poses.size());
    const double mean = sum / n;
    json entry;
    entry["finger"] = names[f];
    entry["mean_mm"] = mean;
    entry["std_mm"] = std::sqrt(std::max(0.0, sq / n - mean * mean));
    fingers.push_back(entry);
    std::printf("interaction %s: mean %.3f mm\n", names[f], mean);
  }
  json j;
  j["schema"] = "fsglove-report-interaction";
  j["version"] = 1;
  j["object"] = object_path;
  j["frames"] = recon.poses.size();
  j["fingers"] = fingers;
  if (!output.empty()) write_json(j, output);
  return 0;
}

int run_evaluate_drift(std::uint64_t seed, double minutes, double rate_hz,
                       const std::string& model_path, const std::string& output,
                       const std::string& csv) {
  const HandModel model = resolve_model(model_path);
  Scenario scenario;
  scenario.segments = {{RefPose::rest, minutes * 60.0}};
  scenario.rate_hz = rate_hz;
  scenario.beta = VecX::Zero(model.skeleton.shape_dim);
  scenario.noise.seed = seed;
  const auto traj = make_scenario_trajectory(model, scenario.beta,
                                             scenario.segments, rate_hz);
  const auto imu =
      synthesize_imu(traj.trajectory, scenario.extrinsics, scenario.noise, model);

  std::vector<std::pair<Timestamp, Mat3>> measured, truth;
  for (std::size_t k = 0; k < traj.trajectory.points.size(); ++k) {
    const auto fk = forward_kinematics(model.skeleton, scenario.beta,
                                       traj.trajectory.points[k].pose);
    for (int i = 0; i < kNumLinks; ++i) {
      measured.emplace_back(imu[i][k].timestamp,
                            quat_to_matrix(imu[i][k].orientation));
      truth.emplace_back(imu[i][k].timestamp, fk[i].rotation);
    }
  }
  const DriftReport report = drift_report(measured, truth);
  json j;
  j["schema"] = "fsglove-report-drift";
  j["version"] = 1;
  j["seed"] = seed;
  j["kendall_tau"] = report.kendall_tau;
  json series = json::array();
  for (const auto& [minute, err] : report.per_minute_deg)
    series.push_back({{"minute", minute}, {"mean_error_deg", err}});
  j["per_minute"] = series;
  j["final_minute_deg"] = report.per_minute_deg.back().second;
  if (!output.empty()) write_json(j, output);
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot write " + csv);
    out << "minute,mean_error_deg\n";
    char line[64];
    for (const auto& [minute, err] : report.per_minute_deg) {
      std::snprintf(line, sizeof line, "%d,%.17g\n", minute, err);
      out << line;
    }
  }
  std::printf("drift: final-minute mean %.3f deg, kendall tau %.3f\n",
              report.per_minute_deg.back().second, report.kendall_tau);
  return 0;
}

int run_export_model(const std::string& model_path, const std::string& output) {
  const HandModel model = resolve_model(model_path);
  save_model(model, output);
  std::printf("wrote %s (hash %s)\n", output.c_str(),
              model_content_hash(model).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FSGlove simulation, calibration, and evaluation pipeline"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  std::string calibration_path, recording_path, output_path, obj_dir;
  std::string host = "127.0.0.1", speed = "max", object_path, sidecar_path;
  std::string eval_kind, csv_path;
  int port = 0, every = 10, max_clients = 1;
  double duration_s = 30.0, rate_hz = 100.0, max_angle_deg = 90.0;
  double sigma_static = 0.8, sigma_dynamic = 2.5, minutes = 30.0;
  double drift_rate_hz = 2.0;
  Timestamp window_ns = 10'000'000;

  auto add_scenario_opts = [&](CLI::App* cmd) {
    cmd->add_option("--model", sim_args.model_path,
                    "hand model JSON (built-in default when omitted)");
    cmd->add_option("--config", sim_args.config_path, "scenario JSON");
    cmd->add_option("--seed", sim_args.seed, "seed override")
        ->each([&](const std::string&) { sim_args.seed_set = true; });
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize a glove session");
  add_scenario_opts(simulate);
  simulate->add_option("--output", sim_args.output, "recording path");

  auto* serve = app.add_subcommand("serve", "stream a scenario over TCP");
  add_scenario_opts(serve);
  serve->add_option("--port", port, "TCP port (0 = ephemeral)");
  serve->add_option("--speed", speed, "realtime|max");
  serve->add_option("--max-clients", max_clients,
                    "exit after this many clients (0 = forever)");

  auto* record = app.add_subcommand("record", "record a served stream to a file");
  record->add_option("--host", host, "server address");
  record->add_option("--port", port, "server port")->required();
  record->add_option("--output", output_path, "recording path")->required();

  auto* replay = app.add_subcommand("replay", "replay a recording");
  replay->add_option("--input", recording_path, "recording path")->required();
  replay->add_option("--output", output_path, "write packets to a new recording");
  replay->add_option("--speed", speed, "realtime|max");

  auto* calibrate = app.add_subcommand("calibrate", "solve the session calibration");
  calibrate->add_option("--recording", recording_path)->required();
  calibrate->add_option("--model", sim_args.model_path);
  calibrate->add_option("--output", output_path, "calibration JSON")->required();

  auto* reconstruct = app.add_subcommand("reconstruct", "rebuild per-frame poses");
  reconstruct->add_option("--recording", recording_path)->required();
  reconstruct->add_option("--calibration", calibration_path)->required();
  reconstruct->add_option("--model", sim_args.model_path);
  reconstruct->add_option("--output", output_path, "poses JSON")->required();
  reconstruct->add_option("--export-obj", obj_dir, "write OBJ meshes here");
  reconstruct->add_option("--every", every, "mesh decimation factor");
  reconstruct->add_option("--window", window_ns, "sync window (ns)");

  auto* evaluate = app.add_subcommand("evaluate", "run an evaluation experiment");
  evaluate->add_option("kind", eval_kind, "joint|shape|pinch|interaction|drift")
      ->required();
  evaluate->add_option("--model", sim_args.model_path);
  evaluate->add_option("--recording", recording_path);
  evaluate->add_option("--calibration", calibration_path);
  evaluate->add_option("--sidecar", sidecar_path);
  evaluate->add_option("--object", object_path, "OBJ mesh for interaction");
  evaluate->add_option("--output", output_path, "report JSON");
  evaluate->add_option("--csv", csv_path, "per-sample series as CSV");
  evaluate->add_option("--seed", sim_args.seed)->each([&](const std::string&) {
    sim_args.seed_set = true;
  });
  evaluate->add_option("--duration", duration_s, "hinge sweep seconds");
  evaluate->add_option("--rate", rate_hz, "hinge sample rate");
  evaluate->add_option("--max-angle", max_angle_deg, "hinge sweep range (deg)");
  evaluate->add_option("--sigma-static", sigma_static);
  evaluate->add_option("--sigma-dynamic", sigma_dynamic);
  evaluate->add_option("--minutes", minutes, "drift hold length");
  evaluate->add_option("--drift-rate-hz", drift_rate_hz, "drift sim sample rate");

  auto* export_model = app.add_subcommand("export-model", "write a model JSON");
  export_model->add_option("--model", sim_args.model_path, "source model");
  export_model->add_option("--output", output_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_args);
    if (serve->parsed()) return run_serve(sim_args, port, speed, max_clients);
    if (record->parsed()) return run_record(host, port, output_path);
    if (replay->parsed()) return run_replay(recording_path, output_path, speed);
    if (calibrate->parsed())
      return run_calibrate(recording_path, sim_args.model_path, output_path);
    if (reconstruct->parsed())
      return run_reconstruct(recording_path, calibration_path,
                             sim_args.model_path, output_path, obj_dir, every,
                             window_ns);
    if (evaluate->parsed()) {
      if (eval_kind == "joint")
        return run_evaluate_joint(sim_args.seed, duration_s, rate_hz,
                                  max_angle_deg, sigma_static, sigma_dynamic,
                                  output_path, csv_path);
      if (eval_kind == "shape")
        return run_evaluate_shape(sim_args.model_path, sidecar_path,
                                  calibration_path, sim_args.seed, output_path);
      if (eval_kind == "pinch")
        return run_evaluate_pinch(recording_path, calibration_path,
                                  sim_args.model_path, output_path);
      if (eval_kind == "interaction")
        return run_evaluate_interaction(recording_path, calibration_path,
                                        sim_args.model_path, object_path,
                                        output_path);
      if (eval_kind == "drift")
        return run_evaluate_drift(sim_args.seed, minutes, drift_rate_hz,
                                  sim_args.model_path, output_path, csv_path);
      std::fprintf(stderr, "unknown evaluate kind: %s\n", eval_kind.c_str());
      return kExitUsage;
    }
    if (export_model->parsed())
      return run_export_model(sim_args.model_path, output_path);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const VersionError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ModelHashMismatch& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
