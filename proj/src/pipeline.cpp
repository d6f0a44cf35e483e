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

#include "skinsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "skinsim/error.hpp"
#include "skinsim/physics.hpp"
#include "skinsim/util.hpp"

namespace skinsim {

std::vector<TaxelRef> canonical_taxel_order(const Patch& patch) {
  std::vector<const TriangleModule*> tris;
  for (const TriangleModule& t : patch.triangles) tris.push_back(&t);
  std::sort(tris.begin(), tris.end(),
            [](const TriangleModule* a, const TriangleModule* b) {
              if (a->i2c_bus != b->i2c_bus) return a->i2c_bus < b->i2c_bus;
              return a->i2c_addr < b->i2c_addr;
            });
  std::vector<TaxelRef> order;
  order.reserve(tris.size() * kChannelsPerTriangle);
  for (const TriangleModule* t : tris) {
    for (int ch = 0; ch < kChannelsPerTriangle; ++ch) {
      order.push_back({t->id, ch});
    }
  }
  return order;
}

namespace {

int flat_index(const std::vector<TaxelRef>& order, int triangle_id,
               int channel) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i].triangle_id == triangle_id && order[i].channel == channel) {
      return static_cast<int>(i);
    }
  }
  throw Error(ErrorCode::kUnknownTaxel,
              "triangle " + std::to_string(triangle_id) + " channel " +
                  std::to_string(channel));
}

const TaxelDescriptor& descriptor(const Patch& patch, const TaxelRef& ref) {
  const TriangleModule* tri = patch.find_triangle(ref.triangle_id);
  if (tri == nullptr) {
    throw Error(ErrorCode::kUnknownTaxel,
                "triangle " + std::to_string(ref.triangle_id));
  }
  return tri->taxels[ref.channel];
}

}  // namespace

Baseline capture_baseline(std::span<const CountFrame> stream,
                          int window_ticks) {
  if (stream.empty() || window_ticks < 1) {
    throw Error(ErrorCode::kEmptyStream, "no frames to average");
  }
  const int window =
      std::min<int>(window_ticks, static_cast<int>(stream.size()));
  Baseline b;
  b.window_ticks = window;
  b.mean_counts.assign(stream[0].size(), 0.0);
  for (int n = 0; n < window; ++n) {
    for (std::size_t i = 0; i < b.mean_counts.size(); ++i) {
      b.mean_counts[i] += stream[n][i];
    }
  }
  for (double& v : b.mean_counts) v /= window;
  return b;
}

const CalibrationEntry* CalibrationTable::find(int triangle_id,
                                               int channel) const {
  for (const CalibrationEntry& e : entries) {
    if (e.triangle_id == triangle_id && e.channel == channel) return &e;
  }
  return nullptr;
}

int CalibrationTable::reference_pad(int triangle_id) const {
  for (const TriangleReference& r : references) {
    if (r.triangle_id == triangle_id) return r.reference_pad_channel;
  }
  return kThermalChannelA;
}

CalibrationTable CalibrationTable::zeros(const Patch& patch) {
  CalibrationTable t;
  for (const TriangleModule& tri : patch.triangles) {
    t.references.push_back({tri.id, kThermalChannelA});
    for (const TaxelDescriptor& x : tri.taxels) {
      if (x.kind == TaxelKind::kPressure) {
        t.entries.push_back({tri.id, x.channel, 0.0, 0.0});
      }
    }
  }
  return t;
}

void CalibrationTable::save(std::ostream& out) const {
  out << "# skinsim calibration table\n";
  out << "# reference <triangle_id> <pad_channel>\n";
  out << "# gain <triangle_id> <channel> <K_i> <residual_rms_counts>\n";
  for (const TriangleReference& r : references) {
    out << "reference " << r.triangle_id << ' ' << r.reference_pad_channel
        << '\n';
  }
  for (const CalibrationEntry& e : entries) {
    out << "gain " << e.triangle_id << ' ' << e.channel << ' '
        << format_double(e.gain) << ' '
        << format_double(e.residual_rms_counts) << '\n';
  }
}

CalibrationTable CalibrationTable::load(std::istream& in) {
  CalibrationTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string kind;
    row >> kind;
    if (kind == "reference") {
      TriangleReference r;
      row >> r.triangle_id >> r.reference_pad_channel;
      t.references.push_back(r);
    } else if (kind == "gain") {
      CalibrationEntry e;
      std::string gain, residual;
      row >> e.triangle_id >> e.channel >> gain >> residual;
      e.gain = parse_double(gain);
      e.residual_rms_counts = parse_double(residual);
      t.entries.push_back(e);
    } else {
      throw Error(ErrorCode::kIoError, "bad calibration row: " + line);
    }
  }
  return t;
}

CalibrationTable calibrate_gains(std::span<const CountFrame> recording,
                                 const Patch& patch) {
  if (recording.empty()) {
    throw Error(ErrorCode::kEmptyStream, "empty sweep recording");
  }
  const std::vector<TaxelRef> order = canonical_taxel_order(patch);
  const std::size_t n = recording.size();

  std::vector<double> means(order.size(), 0.0);
  for (const CountFrame& f : recording) {
    for (std::size_t i = 0; i < order.size(); ++i) means[i] += f[i];
  }
  for (double& m : means) m /= static_cast<double>(n);

  auto fit_against_pad = [&](int i, int pad, double& gain, double& rms) {
    double var_h = 0.0, cov = 0.0;
    for (const CountFrame& f : recording) {
      const double dh = f[pad] - means[pad];
      var_h += dh * dh;
      cov += (f[i] - means[i]) * dh;
    }
    if (var_h / static_cast<double>(n) < 1e-6) {
      throw Error(ErrorCode::kDegenerateSweep,
                  "thermal pad shows no temperature excursion");
    }
    gain = cov / var_h;
    double ss = 0.0;
    for (const CountFrame& f : recording) {
      const double r = (f[i] - means[i]) - gain * (f[pad] - means[pad]);
      ss += r * r;
    }
    rms = std::sqrt(ss / static_cast<double>(n));
  };

  CalibrationTable table;
  for (const TriangleModule& tri : patch.triangles) {
    const int pad_a = flat_index(order, tri.id, kThermalChannelA);
    const int pad_b = flat_index(order, tri.id, kThermalChannelB);

    // pick the pad with the lower total fit residual, channel 6 on ties
    double rms_total[2] = {0.0, 0.0};
    std::vector<CalibrationEntry> fits[2];
    const int pads[2] = {pad_a, pad_b};
    for (int k = 0; k < 2; ++k) {
      for (const TaxelDescriptor& x : tri.taxels) {
        if (x.kind != TaxelKind::kPressure) continue;
        const int i = flat_index(order, tri.id, x.channel);
        CalibrationEntry e;
        e.triangle_id = tri.id;
        e.channel = x.channel;
        fit_against_pad(i, pads[k], e.gain, e.residual_rms_counts);
        rms_total[k] += e.residual_rms_counts;
        fits[k].push_back(e);
      }
    }
    const int chosen = rms_total[1] < rms_total[0] ? 1 : 0;
    table.references.push_back(
        {tri.id, chosen == 0 ? kThermalChannelA : kThermalChannelB});
    table.entries.insert(table.entries.end(), fits[chosen].begin(),
                         fits[chosen].end());
  }
  return table;
}

CountFrame compensate(const CountFrame& frame, const Baseline& baseline,
                      const CalibrationTable& table, const Patch& patch) {
  const std::vector<TaxelRef> order = canonical_taxel_order(patch);
  CountFrame out(frame.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TaxelDescriptor& desc = descriptor(patch, order[i]);
    if (desc.kind == TaxelKind::kThermal) {
      out[i] = frame[i];
      continue;
    }
    const CalibrationEntry* entry =
        table.find(order[i].triangle_id, order[i].channel);
    if (entry == nullptr) {
      throw Error(ErrorCode::kMissingCalibration,
                  "triangle " + std::to_string(order[i].triangle_id) +
                      " channel " + std::to_string(order[i].channel));
    }
    const int pad = flat_index(order, order[i].triangle_id,
                               table.reference_pad(order[i].triangle_id));
    out[i] = frame[i] - entry->gain * (frame[pad] - baseline.mean_counts[pad]);
  }
  return out;
}

std::vector<ActivationRegion> detect_contacts(const CountFrame& compensated,
                                              const Baseline& baseline,
                                              const Patch& patch,
                                              double threshold_counts,
                                              double adjacency_radius_mm) {
  const std::vector<TaxelRef> order = canonical_taxel_order(patch);
  std::vector<int> active;
  std::vector<double> responses;
  std::vector<Vec2> positions;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const TaxelDescriptor& desc = descriptor(patch, order[i]);
    if (desc.kind != TaxelKind::kPressure) continue;
    const double r = compensated[i] - baseline.mean_counts[i];
    if (r > threshold_counts) {
      active.push_back(static_cast<int>(i));
      responses.push_back(r);
      positions.push_back(taxel_world_position(patch, order[i].triangle_id,
                                               order[i].channel));
    }
  }

  // union-find over the active set
  std::vector<int> parent(active.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&parent](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      if (distance(positions[a], positions[b]) < adjacency_radius_mm) {
        parent[find(static_cast<int>(a))] = find(static_cast<int>(b));
      }
    }
  }

  std::map<int, ActivationRegion> groups;
  for (std::size_t a = 0; a < active.size(); ++a) {
    ActivationRegion& g = groups[find(static_cast<int>(a))];
    g.taxels.push_back(order[active[a]]);
    g.responses_counts.push_back(responses[a]);
  }
  std::vector<ActivationRegion> out;
  out.reserve(groups.size());
  for (auto& [root, region] : groups) out.push_back(std::move(region));
  return out;
}

ContactEstimate localize_contact(const ActivationRegion& region,
                                 const Patch& patch, const MaterialModel& m,
                                 const CdcParams& cdc) {
  if (region.taxels.empty()) {
    throw Error(ErrorCode::kEmptyStream, "empty activation region");
  }
  ContactEstimate est;
  est.patch_id = patch.id;
  double wsum = 0.0;
  double peak_counts = 0.0;
  Vec2 acc;
  for (std::size_t i = 0; i < region.taxels.size(); ++i) {
    const double w = region.responses_counts[i];
    const Vec2 p = taxel_world_position(patch, region.taxels[i].triangle_id,
                                        region.taxels[i].channel);
    acc = acc + p * w;
    wsum += w;
    peak_counts = std::max(peak_counts, w);
    est.total_deltac_ff += w * cdc.lsb_ff;
  }
  est.centroid_mm = acc * (1.0 / wsum);
  est.support = region.taxels;
  const double peak_ff =
      std::min(peak_counts * cdc.lsb_ff, m.full_scale_deltac_ff());
  est.peak_pressure_kpa = estimate_pressure(peak_ff, m);
  return est;
}

double estimate_pressure(double deltac_ff, const MaterialModel& m) {
  return deltac_to_pressure(deltac_ff, m);
}

std::vector<SlopeFit> fit_sensitivity(std::span<const PressureSample> samples,
                                      std::span<const PressureRange> ranges) {
  std::vector<SlopeFit> out;
  for (const PressureRange& range : ranges) {
    std::vector<double> x, y;
    for (const PressureSample& s : samples) {
      if (s.pressure_kpa >= range.lo_kpa - 1e-9 &&
          s.pressure_kpa <= range.hi_kpa + 1e-9) {
        x.push_back(s.pressure_kpa);
        y.push_back(s.deltac_ff);
      }
    }
    if (x.size() < 2) {
      throw Error(ErrorCode::kInsufficientData,
                  "range " + format_double(range.lo_kpa) + ".." +
                      format_double(range.hi_kpa) + " kPa has " +
                      std::to_string(x.size()) + " samples");
    }
    SlopeFit f;
    f.range = range;
    f.slope_ff_per_kpa = fit_line(x, y).slope;
    f.sample_count = static_cast<int>(x.size());
    out.push_back(f);
  }
  return out;
}

RelaxationFit fit_relaxation(std::span<const double> time_s,
                             std::span<const double> deltac_ff) {
  if (time_s.size() != deltac_ff.size() || time_s.size() < 3) {
    throw Error(ErrorCode::kNonPositiveSeries,
                "need at least 3 paired samples");
  }
  std::vector<double> t, lny;
  t.reserve(time_s.size());
  lny.reserve(time_s.size());
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    if (deltac_ff[i] <= 0.0) {
      throw Error(ErrorCode::kNonPositiveSeries,
                  "non-positive sample at index " + std::to_string(i));
    }
    t.push_back(time_s[i]);
    lny.push_back(std::log(deltac_ff[i]));
  }
  const LineFit f = fit_line(t, lny);
  RelaxationFit out;
  out.sigma0_ff = std::exp(f.intercept);
  out.tau_s = -1.0 / f.slope;
  return out;
}

}  // namespace skinsim
