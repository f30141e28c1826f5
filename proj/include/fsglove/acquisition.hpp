#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fsglove/glove_sim.hpp"
#include "fsglove/types.hpp"

namespace fsglove {

// Wire format, little-endian throughout:
//   magic "FSGV", version u8 = 1, type u8, payload length u16, payload,
//   CRC32 (IEEE) of header + payload.
// Payloads:
//   IMU (53 B):    sensor_id u8, timestamp u64, orientation 4xf32 (w,x,y,z),
//                  angular velocity 3xf32, acceleration 3xf32, 4 B reserved
//   dorsal (56 B): timestamp u64, rotation 4xf32 (w,x,y,z),
//                  translation 3xf64, 8 B reserved
//   clock (33 B):  probe id u8, four u64 timestamps
//   marker (9 B):  segment kind u8 (bit 7 set marks the hold end), u64 time

enum class PacketType : std::uint8_t {
  imu = 1,
  dorsal = 2,
  clock_probe = 3,
  segment_marker = 4,
};

struct ClockProbe {
  std::uint8_t probe_id = 0;
  std::uint64_t t1 = 0, t2 = 0, t3 = 0, t4 = 0;
};

inline constexpr std::uint8_t kMarkerEndBit = 0x80;

struct SegmentMarker {
  RefPose kind = RefPose::rest;
  bool hold_end = false;
  Timestamp timestamp = 0;
};

using AnyPacket = std::variant<ImuSample, DorsalSample, ClockProbe, SegmentMarker>;

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_packet(const ImuSample& sample);
std::vector<std::uint8_t> encode_packet(const DorsalSample& sample);
std::vector<std::uint8_t> encode_packet(const ClockProbe& probe);
std::vector<std::uint8_t> encode_packet(const SegmentMarker& marker);

/// Total frame size implied by a header, or 0 when fewer than 8 bytes are
/// available yet. Throws BadMagic on a corrupted header.
std::size_t packet_frame_size(const std::uint8_t* data, std::size_t size);

/// Decodes one complete frame. Throws BadMagic / BadLength / BadChecksum /
/// UnknownType.
AnyPacket decode_packet(const std::uint8_t* data, std::size_t size);

struct ClockOffset {
  std::int64_t offset_ns = 0;
  std::int64_t delay_ns = 0;
};

/// Standard four-timestamp exchange: offset = ((t2-t1)+(t3-t4))/2,
/// delay = (t4-t1)-(t3-t2). Throws NegativeDelay.
ClockOffset estimate_clock_offset(std::uint64_t t1, std::uint64_t t2,
                                  std::uint64_t t3, std::uint64_t t4);

/// One synchronized tick: every sensor present, dorsal attached when a
/// sample falls inside the window.
struct FrameSet {
  Timestamp timestamp = 0;  // pivot sample's timestamp
  std::array<std::optional<ImuSample>, kNumLinks> imu;
  std::optional<DorsalSample> dorsal;
  Timestamp spread = 0;  // max minus min timestamp within the set
};

struct SyncConfig {
  Timestamp window_ns = 10'000'000;  // one tick at 100 Hz
};

struct SyncStats {
  std::uint64_t emitted = 0;
  std::array<std::uint64_t, kNumLinks> dropped_imu{};
  std::uint64_t dropped_dorsal = 0;
};

/// Deterministic greedy matcher over timestamp-ordered queues. Each emitted
/// set takes the oldest sample of every stream inside [pivot - window/2,
/// pivot], pivot being the newest queue head; samples that can no longer
/// join any set are dropped and counted.
std::vector<std::vector<int>> match_streams(
    const std::vector<std::vector<Timestamp>>& queues, Timestamp window,
    std::vector<std::uint64_t>* drops = nullptr);

std::vector<FrameSet> synchronize(
    const std::array<std::vector<ImuSample>, kNumLinks>& imu_streams,
    const std::vector<DorsalSample>& dorsal_stream, const SyncConfig& config,
    SyncStats* stats = nullptr);

// Recording file: 16-byte header (magic "FSGR", version u32, stream count
// u32, reserved u32) followed by packets verbatim.

struct Recording {
  std::uint32_t version = 1;
  std::uint32_t stream_count = 0;
  std::vector<AnyPacket> packets;
  std::vector<std::vector<std::uint8_t>> frames;  // raw bytes per packet
};

void write_recording(const std::string& path, std::uint32_t stream_count,
                     const std::vector<std::vector<std::uint8_t>>& frames);

/// Throws IoError when unreadable and CorruptFile (with the offset of the
/// last intact packet boundary) when the packet chain breaks.
Recording read_recording(const std::string& path);

/// Splits a recording into per-sensor queues, the dorsal queue, and the
/// segment markers, preserving order.
struct SessionStreams {
  std::array<std::vector<ImuSample>, kNumLinks> imu;
  std::vector<DorsalSample> dorsal;
  std::vector<SegmentMarker> markers;
};

SessionStreams split_recording(const Recording& recording);

}  // namespace fsglove
