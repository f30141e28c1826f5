#include "fsglove/acquisition.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "fsglove/errors.hpp"

namespace fsglove {

namespace {

constexpr std::uint8_t kMagic[4] = {0x46, 0x53, 0x47, 0x56};  // "FSGV"
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 8;
constexpr std::size_t kCrcSize = 4;

constexpr std::size_t kImuPayload = 53;
constexpr std::size_t kDorsalPayload = 56;
constexpr std::size_t kClockPayload = 33;
constexpr std::size_t kMarkerPayload = 9;

constexpr char kRecMagic[4] = {'F', 'S', 'G', 'R'};

struct Cursor {
  std::vector<std::uint8_t>& buf;

  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    buf.push_back(v & 0xff);
    buf.push_back(v >> 8);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
  const std::uint8_t* p;

  std::uint8_t u8() { return *p++; }
  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    p += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  double f64() { return std::bit_cast<double>(u64()); }
};

std::vector<std::uint8_t> finish_packet(PacketType type,
                                        const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + payload.size() + kCrcSize);
  Cursor c{out};
  for (std::uint8_t m : kMagic) c.u8(m);
  c.u8(kVersion);
  c.u8(static_cast<std::uint8_t>(type));
  c.u16(static_cast<std::uint16_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  c.u32(crc32_ieee(out.data(), out.size()));
  return out;
}

}  // namespace

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t size) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i)
    crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_packet(const ImuSample& sample) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kImuPayload);
  Cursor c{payload};
  c.u8(static_cast<std::uint8_t>(sample.sensor_id));
  c.u64(sample.timestamp);
  c.f32(sample.orientation.w);
  c.f32(sample.orientation.x);
  c.f32(sample.orientation.y);
  c.f32(sample.orientation.z);
  for (int a = 0; a < 3; ++a) c.f32(sample.angular_velocity[a]);
  for (int a = 0; a < 3; ++a) c.f32(sample.linear_acceleration[a]);
  c.u32(0);  // reserved
  return finish_packet(PacketType::imu, payload);
}

std::vector<std::uint8_t> encode_packet(const DorsalSample& sample) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kDorsalPayload);
  Cursor c{payload};
  c.u64(sample.timestamp);
  c.f32(sample.rotation.w);
  c.f32(sample.rotation.x);
  c.f32(sample.rotation.y);
  c.f32(sample.rotation.z);
  for (int a = 0; a < 3; ++a) c.f64(sample.translation[a]);
  c.u64(0);  // reserved
  return finish_packet(PacketType::dorsal, payload);
}

std::vector<std::uint8_t> encode_packet(const ClockProbe& probe) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kClockPayload);
  Cursor c{payload};
  c.u8(probe.probe_id);
  c.u64(probe.t1);
  c.u64(probe.t2);
  c.u64(probe.t3);
  c.u64(probe.t4);
  return finish_packet(PacketType::clock_probe, payload);
}

std::vector<std::uint8_t> encode_packet(const SegmentMarker& marker) {
  std::vector<std::uint8_t> payload;
  payload.reserve(kMarkerPayload);
  Cursor c{payload};
  c.u8(static_cast<std::uint8_t>(marker.kind) |
       (marker.hold_end ? kMarkerEndBit : 0));
  c.u64(marker.timestamp);
  return finish_packet(PacketType::segment_marker, payload);
}

std::size_t packet_frame_size(const std::uint8_t* data, std::size_t size) {
  if (size < kHeaderSize) return 0;
  if (std::memcmp(data, kMagic, 4) != 0)
    throw BadMagic("packet magic mismatch");
  const std::uint16_t len = static_cast<std::uint16_t>(data[6] | (data[7] << 8));
  return kHeaderSize + len + kCrcSize;
}

AnyPacket decode_packet(const std::uint8_t* data, std::size_t size) {
  const std::size_t frame = packet_frame_size(data, size);
  if (frame == 0 || size < frame) throw BadLength("truncated packet frame");
  if (data[4] != kVersion)
    throw UnknownType("unsupported protocol version " + std::to_string(data[4]));
  Reader crc_reader{data + frame - kCrcSize};
  if (crc_reader.u32() != crc32_ieee(data, frame - kCrcSize))
    throw BadChecksum("packet CRC mismatch");

  const auto type = static_cast<PacketType>(data[5]);
  const std::uint16_t len = static_cast<std::uint16_t>(data[6] | (data[7] << 8));
  Reader r{data + kHeaderSize};
  switch (type) {
    case PacketType::imu: {
      if (len != kImuPayload) throw BadLength("IMU payload must be 53 bytes");
      ImuSample s;
      s.sensor_id = r.u8();
      s.timestamp = r.u64();
      const double w = r.f32(), x = r.f32(), y = r.f32(), z = r.f32();
      s.orientation = UnitQuaternion::from_raw(w, x, y, z);
      for (int a = 0; a < 3; ++a) s.angular_velocity[a] = r.f32();
      for (int a = 0; a < 3; ++a) s.linear_acceleration[a] = r.f32();
      if (s.sensor_id >= kNumLinks) throw BadLength("sensor id out of range");
      return s;
    }
    case PacketType::dorsal: {
      if (len != kDorsalPayload) throw BadLength("dorsal payload must be 56 bytes");
      DorsalSample s;
      s.timestamp = r.u64();
      const double w = r.f32(), x = r.f32(), y = r.f32(), z = r.f32();
      s.rotation = UnitQuaternion::from_raw(w, x, y, z);
      for (int a = 0; a < 3; ++a) s.translation[a] = r.f64();
      return s;
    }
    case PacketType::clock_probe: {
      if (len != kClockPayload) throw BadLength("clock payload must be 33 bytes");
      ClockProbe probe;
      probe.probe_id = r.u8();
      probe.t1 = r.u64();
      probe.t2 = r.u64();
      probe.t3 = r.u64();
      probe.t4 = r.u64();
      return probe;
    }
    case PacketType::segment_marker: {
      if (len != kMarkerPayload) throw BadLength("marker payload must be 9 bytes");
      SegmentMarker m;
      const std::uint8_t kind = r.u8();
      m.hold_end = (kind & kMarkerEndBit) != 0;
      m.kind = static_cast<RefPose>(kind & ~kMarkerEndBit);
      m.timestamp = r.u64();
      return m;
    }
    default:
      throw UnknownType("unknown packet type " + std::to_string(data[5]));
  }
}

ClockOffset estimate_clock_offset(std::uint64_t t1, std::uint64_t t2,
                                  std::uint64_t t3, std::uint64_t t4) {
  if (t4 < t1) throw NegativeDelay("client clock ran backwards across the exchange");
  const auto d21 = static_cast<std::int64_t>(t2 - t1);
  const auto d34 = static_cast<std::int64_t>(t3) - static_cast<std::int64_t>(t4);
  const auto d32 = static_cast<std::int64_t>(t3 - t2);
  ClockOffset result;
  result.offset_ns = (d21 + d34) / 2;
  result.delay_ns = static_cast<std::int64_t>(t4 - t1) - d32;
  if (result.delay_ns < 0)
    throw NegativeDelay("round-trip delay is negative: " +
                        std::to_string(result.delay_ns) + " ns");
  return result;
}

std::vector<std::vector<int>> match_streams(
    const std::vector<std::vector<Timestamp>>& queues, Timestamp window,
    std::vector<std::uint64_t>* drops) {
  const std::size_t n = queues.size();
  std::vector<std::size_t> head(n, 0);
  if (drops) drops->assign(n, 0);
  std::vector<std::vector<int>> sets;

  const Timestamp half = window / 2;
  bool exhausted = false;
  while (!exhausted) {
    for (std::size_t s = 0; s < n; ++s)
      if (head[s] >= queues[s].size()) exhausted = true;
    if (exhausted) break;

    // Settle on a pivot: drop anything that can no longer reach the newest
    // head's window, which can in turn raise the pivot.
    bool changed = true;
    while (changed && !exhausted) {
      changed = false;
      Timestamp pivot = 0;
      for (std::size_t s = 0; s < n; ++s)
        pivot = std::max(pivot, queues[s][head[s]]);
      const Timestamp lower = pivot > half ? pivot - half : 0;
      for (std::size_t s = 0; s < n && !exhausted; ++s) {
        while (head[s] < queues[s].size() && queues[s][head[s]] < lower) {
          ++head[s];
          if (drops) (*drops)[s]++;
          changed = true;
        }
        if (head[s] >= queues[s].size()) exhausted = true;
      }
    }
    if (exhausted) break;

    std::vector<int> set(n);
    for (std::size_t s = 0; s < n; ++s) set[s] = static_cast<int>(head[s]++);
    sets.push_back(std::move(set));
  }
  // Leftover samples never made it into a set.
  if (drops)
    for (std::size_t s = 0; s < n; ++s)
      (*drops)[s] += queues[s].size() - head[s];
  return sets;
}

std::vector<FrameSet> synchronize(
    const std::array<std::vector<ImuSample>, kNumLinks>& imu_streams,
    const std::vector<DorsalSample>& dorsal_stream, const SyncConfig& config,
    SyncStats* stats) {
  std::vector<std::vector<Timestamp>> queues(kNumLinks);
  for (int i = 0; i < kNumLinks; ++i) {
    queues[i].reserve(imu_streams[i].size());
    for (const ImuSample& s : imu_streams[i]) queues[i].push_back(s.timestamp);
  }
  std::vector<std::uint64_t> drops;
  const auto sets = match_streams(queues, config.window_ns, &drops);

  SyncStats local;
  for (int i = 0; i < kNumLinks; ++i) local.dropped_imu[i] = drops[i];

  std::vector<FrameSet> frames;
  frames.reserve(sets.size());
  const Timestamp half = config.window_ns / 2;
  std::size_t dorsal_head = 0;
  for (const auto& set : sets) {
    FrameSet frame;
    Timestamp newest = 0, oldest = ~Timestamp{0};
    for (int i = 0; i < kNumLinks; ++i) {
      const ImuSample& s = imu_streams[i][set[i]];
      frame.imu[i] = s;
      newest = std::max(newest, s.timestamp);
      oldest = std::min(oldest, s.timestamp);
    }
    frame.timestamp = newest;

    // Dorsal is optional: attach the sample nearest the pivot inside
    // +-window/2, dropping whatever it supersedes.
    const Timestamp lower = frame.timestamp > half ? frame.timestamp - half : 0;
    while (dorsal_head < dorsal_stream.size() &&
           dorsal_stream[dorsal_head].timestamp < lower) {
      ++dorsal_head;
      local.dropped_dorsal++;
    }
    std::size_t best = dorsal_head;
    bool have = false;
    for (std::size_t d = dorsal_head;
         d < dorsal_stream.size() &&
         dorsal_stream[d].timestamp <= frame.timestamp + half;
         ++d) {
      auto dist = [&](std::size_t idx) {
        const Timestamp t = dorsal_stream[idx].timestamp;
        return t > frame.timestamp ? t - frame.timestamp : frame.timestamp - t;
      };
      if (!have || dist(d) < dist(best)) {
        best = d;
        have = true;
      }
    }
    if (have) {
      frame.dorsal = dorsal_stream[best];
      local.dropped_dorsal += best - dorsal_head;  // skipped older samples
      dorsal_head = best + 1;
      newest = std::max(newest, frame.dorsal->timestamp);
      oldest = std::min(oldest, frame.dorsal->timestamp);
    }
    frame.spread = newest - oldest;
    frames.push_back(std::move(frame));
  }
  local.emitted = frames.size();
  local.dropped_dorsal += dorsal_stream.size() - dorsal_head;
  if (stats) *stats = local;
  return frames;
}

void write_recording(const std::string& path, std::uint32_t stream_count,
                     const std::vector<std::vector<std::uint8_t>>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write recording: " + path);
  std::vector<std::uint8_t> header;
  Cursor c{header};
  for (char m : kRecMagic) c.u8(static_cast<std::uint8_t>(m));
  c.u32(1);
  c.u32(stream_count);
  c.u32(0);
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  for (const auto& frame : frames)
    out.write(reinterpret_cast<const char*>(frame.data()),
              static_cast<std::streamsize>(frame.size()));
  if (!out) throw IoError("short write: " + path);
}

Recording read_recording(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read recording: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kRecMagic, 4) != 0)
    throw BadMagic("not a recording file: " + path);
  Reader r{bytes.data() + 4};
  Recording rec;
  rec.version = r.u32();
  rec.stream_count = r.u32();
  if (rec.version != 1)
    throw UnknownType("unsupported recording version " + std::to_string(rec.version));

  std::size_t offset = 16;
  while (offset < bytes.size()) {
    std::size_t frame = 0;
    try {
      frame = packet_frame_size(bytes.data() + offset, bytes.size() - offset);
      if (frame == 0 || offset + frame > bytes.size())
        throw BadLength("truncated trailing packet");
      rec.packets.push_back(decode_packet(bytes.data() + offset, frame));
    } catch (const Error& e) {
      throw CorruptFile(std::string("recording broken: ") + e.what(), offset);
    }
    rec.frames.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                            bytes.begin() + static_cast<std::ptrdiff_t>(offset + frame));
    offset += frame;
  }
  return rec;
}

SessionStreams split_recording(const Recording& recording) {
  SessionStreams streams;
  for (const AnyPacket& packet : recording.packets) {
    if (const auto* imu = std::get_if<ImuSample>(&packet))
      streams.imu[imu->sensor_id].push_back(*imu);
    else if (const auto* dorsal = std::get_if<DorsalSample>(&packet))
      streams.dorsal.push_back(*dorsal);
    else if (const auto* marker = std::get_if<SegmentMarker>(&packet))
      streams.markers.push_back(*marker);
  }
  return streams;
}

}  // namespace fsglove
