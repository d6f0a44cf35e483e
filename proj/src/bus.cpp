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

#include "skinsim/bus.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "skinsim/error.hpp"

namespace skinsim {

std::array<std::uint16_t, kChannelsPerTriangle> cdc_sample_triangle(
    const TriangleModule& triangle, PatchSimulator& sim) {
  return sim.sample_triangle(triangle.id);
}

std::array<CanFrame, kFramesPerTriangle> encode_frames(
    const std::array<std::uint16_t, kChannelsPerTriangle>& samples,
    const TriangleAddress& address, std::uint64_t tick) {
  if (address.board_id < 0 || address.board_id > 15 ||
      address.triangle_index < 0 || address.triangle_index > 15) {
    throw Error(ErrorCode::kAddressOverflow,
                "board " + std::to_string(address.board_id) + " triangle " +
                    std::to_string(address.triangle_index));
  }
  const std::uint16_t can_id =
      static_cast<std::uint16_t>((kSkinClassBits << 8) |
                                 (address.board_id << 4) |
                                 address.triangle_index);
  const std::uint8_t tick_tag = static_cast<std::uint8_t>(tick % 64);

  std::array<CanFrame, kFramesPerTriangle> frames;
  for (int f = 0; f < kFramesPerTriangle; ++f) {
    CanFrame& frame = frames[f];
    frame.can_id = can_id;
    frame.dlc = 7;
    frame.data[0] = static_cast<std::uint8_t>((tick_tag << 2) | f);
    for (int k = 0; k < 3; ++k) {
      const std::uint16_t v = samples[3 * f + k];
      frame.data[1 + 2 * k] = static_cast<std::uint8_t>(v >> 8);
      frame.data[2 + 2 * k] = static_cast<std::uint8_t>(v & 0xff);
    }
  }
  return frames;
}

DecodedTriangle decode_frames(std::span<const CanFrame> frames) {
  if (frames.size() != kFramesPerTriangle) {
    throw Error(ErrorCode::kMissingFrame,
                "expected 4 frames, got " + std::to_string(frames.size()));
  }
  DecodedTriangle out;
  bool seen[kFramesPerTriangle] = {false, false, false, false};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const CanFrame& frame = frames[i];
    if ((frame.can_id >> 8) != kSkinClassBits) {
      throw Error(ErrorCode::kBadClassBits,
                  "can_id " + std::to_string(frame.can_id));
    }
    if (frame.dlc != 7) {
      throw Error(ErrorCode::kMissingFrame,
                  "dlc " + std::to_string(frame.dlc) + ", want 7");
    }
    const int board = (frame.can_id >> 4) & 0xf;
    const int tri = frame.can_id & 0xf;
    const std::uint8_t tick_tag = frame.data[0] >> 2;
    const int index = frame.data[0] & 0x3;
    if (i == 0) {
      out.address = {board, tri};
      out.tick_mod64 = tick_tag;
    } else if (board != out.address.board_id ||
               tri != out.address.triangle_index) {
      throw Error(ErrorCode::kInconsistentTick,
                  "mixed addresses within a frame group");
    } else if (tick_tag != out.tick_mod64) {
      throw Error(ErrorCode::kInconsistentTick,
                  "mixed tick tags within a frame group");
    }
    if (seen[index]) {
      throw Error(ErrorCode::kMissingFrame,
                  "frame index " + std::to_string(index) + " repeated");
    }
    seen[index] = true;
    for (int k = 0; k < 3; ++k) {
      out.samples[3 * index + k] = static_cast<std::uint16_t>(
          (frame.data[1 + 2 * k] << 8) | frame.data[2 + 2 * k]);
    }
  }
  for (int f = 0; f < kFramesPerTriangle; ++f) {
    if (!seen[f]) {
      throw Error(ErrorCode::kMissingFrame,
                  "frame index " + std::to_string(f) + " missing");
    }
  }
  return out;
}

MtbPoller::MtbPoller(PatchSimulator& sim, int board_id)
    : sim_(sim), board_id_(board_id) {
  if (board_id < 0 || board_id > 15 ||
      sim.patch().triangles.size() > kMaxTrianglesPerPatch) {
    throw Error(ErrorCode::kAddressOverflow,
                "board id or triangle count exceeds 4-bit addressing");
  }
}

FrameSet MtbPoller::next() {
  sim_.step();
  FrameSet set;
  set.tick = sim_.tick();
  const std::vector<std::uint16_t> counts = sim_.sample_all();
  const auto& order = sim_.canonical_order();
  const int n_triangles = static_cast<int>(order.size()) / kChannelsPerTriangle;
  set.frames.reserve(n_triangles * kFramesPerTriangle);
  for (int t = 0; t < n_triangles; ++t) {
    std::array<std::uint16_t, kChannelsPerTriangle> samples;
    for (int ch = 0; ch < kChannelsPerTriangle; ++ch) {
      samples[ch] = counts[t * kChannelsPerTriangle + ch];
    }
    const auto frames =
        encode_frames(samples, TriangleAddress{board_id_, t}, set.tick);
    set.frames.insert(set.frames.end(), frames.begin(), frames.end());
  }
  return set;
}

namespace {

void put_u16le(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff),
                         static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void put_u64le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

}  // namespace

void write_log(std::ostream& out, std::span<const LogRecord> records) {
  for (const LogRecord& r : records) {
    put_u64le(out, r.time_ns);
    put_u16le(out, r.frame.can_id);
    out.put(static_cast<char>(r.frame.dlc));
    out.write(reinterpret_cast<const char*>(r.frame.data.data()),
              r.frame.dlc);
  }
}

std::vector<LogRecord> read_log(std::istream& in) {
  std::vector<LogRecord> records;
  std::uint64_t offset = 0;
  while (true) {
    unsigned char header[11];
    in.read(reinterpret_cast<char*>(header), 11);
    const std::streamsize got = in.gcount();
    if (got == 0) break;
    if (got < 11) {
      throw Error(ErrorCode::kCorruptLog,
                  "truncated record header at byte offset " +
                      std::to_string(offset));
    }
    LogRecord r;
    for (int i = 0; i < 8; ++i) {
      r.time_ns |= static_cast<std::uint64_t>(header[i]) << (8 * i);
    }
    r.frame.can_id =
        static_cast<std::uint16_t>(header[8] | (header[9] << 8));
    r.frame.dlc = header[10];
    if (r.frame.dlc > 8) {
      throw Error(ErrorCode::kCorruptLog,
                  "dlc " + std::to_string(r.frame.dlc) +
                      " at byte offset " + std::to_string(offset));
    }
    in.read(reinterpret_cast<char*>(r.frame.data.data()), r.frame.dlc);
    if (in.gcount() < r.frame.dlc) {
      throw Error(ErrorCode::kCorruptLog,
                  "truncated payload at byte offset " +
                      std::to_string(offset));
    }
    offset += 11 + r.frame.dlc;
    records.push_back(r);
  }
  return records;
}

void log_to_csv(std::span<const LogRecord> records, std::ostream& out) {
  out << "time_ns,board_id,triangle_index,channel,tick_mod64,counts\n";
  std::size_t i = 0;
  while (i + kFramesPerTriangle <= records.size()) {
    std::array<CanFrame, kFramesPerTriangle> group;
    for (int f = 0; f < kFramesPerTriangle; ++f) {
      group[f] = records[i + f].frame;
    }
    const DecodedTriangle tri = decode_frames(group);
    for (int ch = 0; ch < kChannelsPerTriangle; ++ch) {
      out << records[i].time_ns << ',' << tri.address.board_id << ','
          << tri.address.triangle_index << ',' << ch << ','
          << static_cast<int>(tri.tick_mod64) << ',' << tri.samples[ch]
          << '\n';
    }
    i += kFramesPerTriangle;
  }
  if (i != records.size()) {
    throw Error(ErrorCode::kCorruptLog,
                "trailing partial frame group of " +
                    std::to_string(records.size() - i) + " frames");
  }
}

}  // namespace skinsim
