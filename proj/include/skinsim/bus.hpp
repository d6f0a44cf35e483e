// Copyright 2026 The skinsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SKINSIM_BUS_HPP_
#define SKINSIM_BUS_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "skinsim/sim.hpp"
#include "skinsim/topology.hpp"

namespace skinsim {

struct TaxelSample {
  int triangle_id = 0;
  int channel = 0;
  std::uint16_t counts = 0;
  std::uint64_t tick = 0;
};

// classic 11-bit frame; skin frames always carry dlc = 7
struct CanFrame {
  std::uint16_t can_id = 0;
  std::uint8_t dlc = 0;
  std::array<std::uint8_t, 8> data = {};

  bool operator==(const CanFrame&) const = default;
};

struct FrameSet {
  std::uint64_t tick = 0;
  std::vector<CanFrame> frames;
};

struct TriangleAddress {
  int board_id = 0;        // 0..15, one per MTB/patch
  int triangle_index = 0;  // 0..15 within the board
};

inline constexpr int kFramesPerTriangle = 4;
inline constexpr std::uint16_t kSkinClassBits = 0b101;

// samples the 12 channels of one triangle through the CDC model, channels in
// order 0..11
std::array<std::uint16_t, kChannelsPerTriangle> cdc_sample_triangle(
    const TriangleModule& triangle, PatchSimulator& sim);

// frame layout:
//   can_id  = (0b101 << 8) | (board_id << 4) | triangle_index
//   data[0] = (tick mod 64) << 2 | frame_index
//   data[1..6] = taxels 3*frame_index .. 3*frame_index+2, big-endian 16-bit
//   dlc = 7
// throws AddressOverflow when board or triangle index exceed 4 bits
std::array<CanFrame, kFramesPerTriangle> encode_frames(
    const std::array<std::uint16_t, kChannelsPerTriangle>& samples,
    const TriangleAddress& address, std::uint64_t tick);

struct DecodedTriangle {
  TriangleAddress address;
  std::uint8_t tick_mod64 = 0;
  std::array<std::uint16_t, kChannelsPerTriangle> samples = {};
};

// exact inverse of encode_frames; throws MissingFrame / InconsistentTick /
// BadClassBits
DecodedTriangle decode_frames(std::span<const CanFrame> frames);

// pull-based source of one FrameSet per tick, covering every triangle of the
// patch in (bus, addr) order
class MtbPoller {
 public:
  MtbPoller(PatchSimulator& sim, int board_id);

  FrameSet next();
  int board_id() const { return board_id_; }

 private:
  PatchSimulator& sim_;
  int board_id_;
};

// binary log record framing: [u64 time_ns][u16 can_id][u8 dlc][dlc bytes],
// little-endian header fields
struct LogRecord {
  std::uint64_t time_ns = 0;
  CanFrame frame;

  bool operator==(const LogRecord&) const = default;
};

void write_log(std::ostream& out, std::span<const LogRecord> records);
// throws CorruptLog with the byte offset of the first bad record
std::vector<LogRecord> read_log(std::istream& in);

// one CSV row per taxel sample: time_ns, board_id, triangle_index, channel,
// tick_mod64, counts
void log_to_csv(std::span<const LogRecord> records, std::ostream& out);

}  // namespace skinsim

#endif  // SKINSIM_BUS_HPP_
