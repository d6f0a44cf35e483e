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

#include <set>
#include <sstream>

#include <doctest.h>

#include "skinsim/bus.hpp"
#include "skinsim/config.hpp"
#include "skinsim/error.hpp"
#include "skinsim/util.hpp"

using namespace skinsim;

namespace {

std::array<std::uint16_t, 12> make_samples(Rng& rng) {
  std::array<std::uint16_t, 12> s;
  for (auto& v : s) v = static_cast<std::uint16_t>(rng.next_u64() & 0xffff);
  return s;
}

}  // namespace

TEST_CASE("encode_frames matches the hand-packed layout") {
  std::array<std::uint16_t, 12> samples;
  for (int i = 0; i < 12; ++i) {
    samples[i] = static_cast<std::uint16_t>(((2 * i + 1) << 8) | (2 * i + 2));
  }
  const auto frames = encode_frames(samples, {1, 2}, 0);
  CHECK(frames[0].can_id == 0x512);
  CHECK(frames[0].dlc == 7);
  const std::array<std::uint8_t, 8> want = {0x00, 0x01, 0x02, 0x03,
                                            0x04, 0x05, 0x06, 0x00};
  CHECK(frames[0].data == want);
  // frame 1 header carries its index; tick tag still zero
  CHECK(frames[1].data[0] == 0x01);
  CHECK(frames[3].data[0] == 0x03);
  // tick tag wraps modulo 64
  const auto later = encode_frames(samples, {1, 2}, 65);
  CHECK(later[0].data[0] == ((65 % 64) << 2 | 0));
}

TEST_CASE("encode address overflow") {
  std::array<std::uint16_t, 12> samples = {};
  CHECK_THROWS_AS(encode_frames(samples, {16, 0}, 0), Error);
  try {
    encode_frames(samples, {0, 16}, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAddressOverflow);
  }
}

TEST_CASE("decode is the exact inverse of encode") {
  Rng rng(99);
  for (int i = 0; i < 20000; ++i) {
    const auto samples = make_samples(rng);
    const TriangleAddress addr{static_cast<int>(rng.next_u64() % 16),
                               static_cast<int>(rng.next_u64() % 16)};
    const std::uint64_t tick = rng.next_u64() % 100000;
    const auto frames = encode_frames(samples, addr, tick);
    const DecodedTriangle d = decode_frames(frames);
    CHECK(d.samples == samples);
    CHECK(d.address.board_id == addr.board_id);
    CHECK(d.address.triangle_index == addr.triangle_index);
    CHECK(d.tick_mod64 == tick % 64);
  }
}

TEST_CASE("decode rejects malformed groups") {
  Rng rng(5);
  const auto samples = make_samples(rng);
  auto frames = encode_frames(samples, {3, 4}, 10);

  SUBCASE("missing index") {
    std::vector<CanFrame> three(frames.begin(), frames.end() - 1);
    three.push_back(frames[2]);  // index {0,1,2,2}
    try {
      decode_frames(three);
      FAIL("expected MissingFrame");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingFrame);
    }
  }
  SUBCASE("mixed can ids") {
    auto other = encode_frames(samples, {3, 5}, 10);
    frames[2] = other[2];
    try {
      decode_frames(frames);
      FAIL("expected InconsistentTick");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInconsistentTick);
    }
  }
  SUBCASE("mixed tick tags") {
    auto later = encode_frames(samples, {3, 4}, 11);
    frames[1] = later[1];
    try {
      decode_frames(frames);
      FAIL("expected InconsistentTick");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInconsistentTick);
    }
  }
  SUBCASE("bad class bits") {
    frames[0].can_id = 0x312;
    try {
      decode_frames(frames);
      FAIL("expected BadClassBits");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBadClassBits);
    }
  }
}

TEST_CASE("mtb_poll emits 4 frames per triangle per tick") {
  SkinConfig config = default_config("flat-prototype");
  config.cdc.noise_std_counts = 0.0;

  SUBCASE("single triangle") {
    TriangleLayout l;
    l.id = 0;
    const Patch one = build_patch(0, {l});
    PatchSimulator sim(one, config.material, config.cdc, 25.0, 1);
    MtbPoller poller(sim, 0);
    const FrameSet set = poller.next();
    CHECK(set.frames.size() == 4);
  }

  SUBCASE("full patch, one simulated second at 25 Hz") {
    PatchSimulator sim(config.patches[0], config.material, config.cdc, 25.0,
                       1);
    MtbPoller poller(sim, 0);
    std::size_t frames = 0;
    std::set<std::tuple<int, int, int, int>> tuples;
    for (int t = 0; t < 25; ++t) {
      const FrameSet set = poller.next();
      CHECK(set.frames.size() == 64);
      frames += set.frames.size();
      for (std::size_t i = 0; i < set.frames.size(); i += 4) {
        std::array<CanFrame, 4> group;
        std::copy_n(set.frames.begin() + i, 4, group.begin());
        const DecodedTriangle d = decode_frames(group);
        for (int f = 0; f < 4; ++f) {
          // no aliasing within a 64-tick window
          CHECK(tuples
                    .insert({d.address.board_id, d.address.triangle_index, f,
                             d.tick_mod64})
                    .second);
        }
      }
    }
    CHECK(frames == 16u * 4u * 25u);
  }
}

TEST_CASE("same seed reproduces identical frame streams") {
  const SkinConfig config = default_config("flat-prototype");
  for (int run = 0; run < 2; ++run) {
    PatchSimulator sim_a(config.patches[0], config.material, config.cdc, 25.0,
                         config.rng_seed);
    PatchSimulator sim_b(config.patches[0], config.material, config.cdc, 25.0,
                         config.rng_seed);
    MtbPoller a(sim_a, 0), b(sim_b, 0);
    for (int t = 0; t < 10; ++t) {
      const FrameSet fa = a.next();
      const FrameSet fb = b.next();
      REQUIRE(fa.frames.size() == fb.frames.size());
      for (std::size_t i = 0; i < fa.frames.size(); ++i) {
        CHECK(fa.frames[i] == fb.frames[i]);
      }
    }
  }
}

TEST_CASE("binary log round-trips byte for byte") {
  Rng rng(1234);
  std::vector<LogRecord> records;
  for (int i = 0; i < 500; ++i) {
    const auto frames = encode_frames(make_samples(rng),
                                      {static_cast<int>(rng.next_u64() % 16),
                                       static_cast<int>(rng.next_u64() % 16)},
                                      i);
    for (const CanFrame& f : frames) {
      records.push_back({static_cast<std::uint64_t>(i) * 40000000ull, f});
    }
  }
  std::ostringstream out;
  write_log(out, records);
  const std::string bytes = out.str();

  std::istringstream in(bytes);
  const auto back = read_log(in);
  REQUIRE(back.size() == records.size());
  CHECK(back == records);

  std::ostringstream out2;
  write_log(out2, back);
  CHECK(out2.str() == bytes);
}

TEST_CASE("truncated log reports the corrupt byte offset") {
  Rng rng(7);
  std::vector<LogRecord> records;
  const auto frames = encode_frames(make_samples(rng), {0, 0}, 0);
  for (const CanFrame& f : frames) records.push_back({0, f});
  std::ostringstream out;
  write_log(out, records);
  std::string bytes = out.str();
  bytes.resize(bytes.size() - 3);

  std::istringstream in(bytes);
  try {
    read_log(in);
    FAIL("expected CorruptLog");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptLog);
    CHECK(std::string(e.what()).find("54") != std::string::npos);
  }
}

TEST_CASE("log_to_csv emits one row per taxel sample") {
  Rng rng(3);
  std::vector<LogRecord> records;
  const auto samples = make_samples(rng);
  for (const CanFrame& f : encode_frames(samples, {2, 7}, 5)) {
    records.push_back({123456789, f});
  }
  std::ostringstream csv;
  log_to_csv(records, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "time_ns,board_id,triangle_index,channel,tick_mod64,counts");
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto f = split_csv_line(line);
    CHECK(f[0] == "123456789");
    CHECK(f[1] == "2");
    CHECK(f[2] == "7");
    CHECK(parse_double(f[5]) == samples[rows]);
    ++rows;
  }
  CHECK(rows == 12);

  // empty log: header only
  std::ostringstream empty_csv;
  log_to_csv(std::vector<LogRecord>{}, empty_csv);
  CHECK(empty_csv.str() ==
        "time_ns,board_id,triangle_index,channel,tick_mod64,counts\n");
}
