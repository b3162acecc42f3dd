#pragma once

// LWPC1 frame container. All integers and IEEE-754 doubles little-endian.
//
//   offset  size   field
//   0       8      magic "LWPC1" followed by three NUL bytes
//   8       1      pulse kind (0 intensity, 1 epw)
//   9       1      max echoes (2 or 3)
//   10      2      reserved, zero
//   12      4      u32 azimuth count A
//   16      8      f64 azimuth min [rad]
//   24      8      f64 azimuth max [rad]
//   32      4      u32 elevation count E
//   36      8*E    f64 elevations [rad]
//   ...     8      u64 frame count F
//   ...     16*F   index: per frame u64 k, u64 point count n
//   then F records, each:
//           1      u8 label (0 unlabeled, 1 clear, 2 rain, 3 fog)
//           1      u8 flags (bit 0 visibility present, bit 1 rainfall rate present)
//           8      f64 visibility [m] (0 when absent)
//           8      f64 rainfall rate [mm/h] (0 when absent)
//           4      u32 scenario id length L
//           L      scenario id bytes
//           8*n    f64 x, then y, z, r, theta, phi, pulse (seven columns)
//           n      u8 echo
//           4*n    u32 ray index (0xFFFFFFFF = none)
//           4*n    i32 object id (-1 none, -2 atmosphere)
//           n      u8 retro-reflective flag

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "lidarwx/core.hpp"
#include "lidarwx/error.hpp"
#include "lidarwx/weather_sim.hpp"

namespace lidarwx {

inline constexpr char kFrameMagic[8] = {'L', 'W', 'P', 'C', '1', '\0', '\0', '\0'};

struct FrameRecord {
  Frame frame;
  std::optional<GroundTruth> truth;
  std::string scenario_id;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

inline std::vector<FrameRecord> to_records(const std::vector<DatasetSample>& samples) {
  std::vector<FrameRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.frame, s.truth, s.scenario_id});
  return out;
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  const std::vector<std::uint8_t>& data() const { return buf_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

  std::uint64_t offset() const { return pos_; }
  std::uint64_t size() const { return buf_.size(); }

  void need(std::uint64_t n) const {
    if (buf_.size() - pos_ < n) throw TruncatedFile(pos_, pos_ + n, buf_.size());
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  std::uint64_t le(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::uint64_t>(n);
    return v;
  }
  const std::vector<std::uint8_t>& buf_;
  std::uint64_t pos_ = 0;
};

inline constexpr std::uint64_t kBytesPerPoint = 7 * 8 + 1 + 4 + 4 + 1;
inline constexpr std::uint64_t kRecordFixedBytes = 1 + 1 + 8 + 8 + 4;

}  // namespace detail

inline std::vector<std::uint8_t> encode_frames(const std::vector<FrameRecord>& records,
                                               const SensorDescriptor* sensor = nullptr) {
  const SensorDescriptor desc =
      sensor ? *sensor : (records.empty() ? SensorDescriptor{} : records.front().frame.sensor);
  for (const auto& r : records) {
    if (!(r.frame.sensor == desc))
      throw InvalidArgument("write_frames: all frames of a file must share one sensor descriptor");
  }
  detail::ByteWriter w;
  w.bytes(kFrameMagic, sizeof kFrameMagic);
  w.u8(static_cast<std::uint8_t>(desc.pulse_kind));
  w.u8(desc.max_echoes);
  w.u16(0);
  w.u32(desc.grid.azimuth_count);
  w.f64(desc.grid.azimuth_min);
  w.f64(desc.grid.azimuth_max);
  w.u32(static_cast<std::uint32_t>(desc.grid.elevations.size()));
  for (double e : desc.grid.elevations) w.f64(e);
  w.u64(records.size());
  for (const auto& r : records) {
    w.u64(r.frame.k);
    w.u64(r.frame.points.size());
  }
  for (const auto& r : records) {
    std::uint8_t flags = 0;
    if (r.truth && r.truth->visibility) flags |= 1;
    if (r.truth && r.truth->rainfall_rate) flags |= 2;
    w.u8(r.truth ? static_cast<std::uint8_t>(r.truth->label) : 0);
    w.u8(flags);
    w.f64(r.truth && r.truth->visibility ? *r.truth->visibility : 0.0);
    w.f64(r.truth && r.truth->rainfall_rate ? *r.truth->rainfall_rate : 0.0);
    w.u32(static_cast<std::uint32_t>(r.scenario_id.size()));
    w.bytes(r.scenario_id.data(), r.scenario_id.size());
    const auto& pts = r.frame.points;
    for (const Point& p : pts) w.f64(p.x);
    for (const Point& p : pts) w.f64(p.y);
    for (const Point& p : pts) w.f64(p.z);
    for (const Point& p : pts) w.f64(p.r);
    for (const Point& p : pts) w.f64(p.theta);
    for (const Point& p : pts) w.f64(p.phi);
    for (const Point& p : pts) w.f64(p.pulse);
    for (const Point& p : pts) w.u8(p.echo);
    for (const Point& p : pts) w.u32(p.ray);
    for (const Point& p : pts) w.i32(p.object);
    for (const Point& p : pts) w.u8(p.retro ? 1 : 0);
  }
  return w.data();
}

inline std::vector<FrameRecord> decode_frames(const std::vector<std::uint8_t>& buf) {
  detail::ByteReader rd(buf);
  if (rd.str(sizeof kFrameMagic) != std::string(kFrameMagic, sizeof kFrameMagic))
    throw FormatError("bad magic, not an LWPC1 frame file", 0);
  SensorDescriptor desc;
  const std::uint64_t kind_at = rd.offset();
  const std::uint8_t kind = rd.u8();
  if (kind > 1) throw FormatError("unknown pulse kind " + std::to_string(kind), kind_at);
  desc.pulse_kind = static_cast<PulseKind>(kind);
  const std::uint64_t echoes_at = rd.offset();
  desc.max_echoes = rd.u8();
  if (desc.max_echoes < 1 || desc.max_echoes > 3)
    throw FormatError("max echoes must be 1..3", echoes_at);
  rd.u16();
  desc.grid.azimuth_count = rd.u32();
  desc.grid.azimuth_min = rd.f64();
  desc.grid.azimuth_max = rd.f64();
  const std::uint32_t elev_count = rd.u32();
  rd.need(8ull * elev_count);
  desc.grid.elevations.resize(elev_count);
  for (auto& e : desc.grid.elevations) e = rd.f64();

  const std::uint64_t frame_count = rd.u64();
  if (frame_count > (rd.size() - rd.offset()) / 16) rd.need(16 * frame_count);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> index(frame_count);
  std::uint64_t min_payload = 0;
  for (auto& [k, n] : index) {
    k = rd.u64();
    n = rd.u64();
    if (n > rd.size()) throw TruncatedFile(rd.offset() - 8, n * detail::kBytesPerPoint, rd.size());
    min_payload += detail::kRecordFixedBytes + n * detail::kBytesPerPoint;
  }
  if (rd.size() - rd.offset() < min_payload)
    throw TruncatedFile(rd.offset(), rd.offset() + min_payload, rd.size());

  std::vector<FrameRecord> out(frame_count);
  for (std::uint64_t f = 0; f < frame_count; ++f) {
    FrameRecord& rec = out[f];
    rec.frame.k = index[f].first;
    rec.frame.sensor = desc;
    const std::uint64_t n = index[f].second;
    const std::uint64_t label_at = rd.offset();
    const std::uint8_t label = rd.u8();
    const std::uint8_t flags = rd.u8();
    const double vis = rd.f64();
    const double rain = rd.f64();
    if (label > 3) throw FormatError("unknown label " + std::to_string(label), label_at);
    if (label != 0) {
      GroundTruth gt;
      gt.label = static_cast<WeatherLabel>(label);
      if (flags & 1) gt.visibility = vis;
      if (flags & 2) gt.rainfall_rate = rain;
      try {
        gt.validate();
      } catch (const InvalidArgument& e) {
        throw FormatError(e.what(), label_at);
      }
      rec.truth = gt;
    }
    const std::uint32_t len = rd.u32();
    rec.scenario_id = rd.str(len);
    rd.need(n * detail::kBytesPerPoint);
    const std::uint64_t points_at = rd.offset();
    auto& pts = rec.frame.points;
    pts.resize(n);
    for (auto& p : pts) p.x = rd.f64();
    for (auto& p : pts) p.y = rd.f64();
    for (auto& p : pts) p.z = rd.f64();
    for (auto& p : pts) p.r = rd.f64();
    for (auto& p : pts) p.theta = rd.f64();
    for (auto& p : pts) p.phi = rd.f64();
    for (auto& p : pts) p.pulse = rd.f64();
    for (auto& p : pts) p.echo = rd.u8();
    for (auto& p : pts) p.ray = rd.u32();
    for (auto& p : pts) p.object = rd.i32();
    for (auto& p : pts) p.retro = rd.u8() != 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!is_valid(pts[i]))
        throw FormatError("frame " + std::to_string(f) + " point " + std::to_string(i) +
                              " violates point invariants",
                          points_at);
    }
  }
  if (rd.offset() != rd.size())
    throw FormatError("trailing bytes after last frame record", rd.offset());
  return out;
}

inline void write_frames(const std::string& path, const std::vector<FrameRecord>& records) {
  const auto bytes = encode_frames(records);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("write to '" + path + "' failed");
}

inline std::vector<FrameRecord> read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_frames(buf);
}

/// Debug export: one row per point.
inline std::string frames_to_csv(const std::vector<FrameRecord>& records) {
  std::string out = "k,x,y,z,r,theta,phi,echo,pulse\n";
  char line[256];
  for (const auto& rec : records) {
    for (const Point& p : rec.frame.points) {
      std::snprintf(line, sizeof line, "%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%u,%.17g\n",
                    static_cast<unsigned long long>(rec.frame.k), p.x, p.y, p.z, p.r, p.theta,
                    p.phi, static_cast<unsigned>(p.echo), p.pulse);
      out += line;
    }
  }
  return out;
}

}  // namespace lidarwx
