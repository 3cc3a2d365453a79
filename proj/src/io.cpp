#include "lidar_normals/io.hpp"

#include <yaml-cpp/yaml.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;

namespace lidar_normals {

const char* to_string(IoErrorKind kind) {
  switch (kind) {
    case IoErrorKind::kBadMagic: return "bad magic";
    case IoErrorKind::kVersionMismatch: return "version mismatch";
    case IoErrorKind::kUnsupportedFlags: return "unsupported flags";
    case IoErrorKind::kTruncated: return "truncated payload";
    case IoErrorKind::kCountMismatch: return "count mismatch";
    case IoErrorKind::kMissingFile: return "missing file";
    case IoErrorKind::kOutOfOrder: return "out-of-order frame ids";
    case IoErrorKind::kParse: return "parse error";
    case IoErrorKind::kWrite: return "write error";
  }
  return "io error";
}

IoError::IoError(IoErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

using namespace frame_format;

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  template <typename U>
  void put_uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_f32(float v) { put_uint(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_uint(std::bit_cast<std::uint64_t>(v)); }
  void put_bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename U>
  U get_uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get_uint<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get_uint<std::uint64_t>()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw IoError(IoErrorKind::kTruncated, "unexpected end of data");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  std::uint32_t count;
  std::uint16_t flags;
  std::optional<Pose> pose;
  double timestamp;
};

void put_vec3_f32(ByteWriter& w, const Vec3& v) {
  w.put_f32(static_cast<float>(v.x()));
  w.put_f32(static_cast<float>(v.y()));
  w.put_f32(static_cast<float>(v.z()));
}

Vec3 get_vec3_f32(ByteReader& r) {
  const double x = r.get_f32(), y = r.get_f32(), z = r.get_f32();
  return Vec3(x, y, z);
}

ByteWriter write_header(std::size_t count, std::uint16_t flags, const std::optional<Pose>& pose, double timestamp,
                        std::size_t payload_records) {
  if (count > UINT32_MAX) throw IoError(IoErrorKind::kWrite, "too many points for the frame format");
  ByteWriter w(kHeaderSize + payload_records * 12);
  w.put_bytes(kMagic, 4);
  w.put_uint<std::uint16_t>(kVersion);
  w.put_uint<std::uint32_t>(static_cast<std::uint32_t>(count));
  w.put_uint<std::uint16_t>(flags | (pose ? kFlagPose : 0));
  const Pose p = pose.value_or(Pose::identity());
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) w.put_f64(p.rotation()(r, c));
  for (int c = 0; c < 3; ++c) w.put_f64(p.translation()[c]);
  w.put_f64(timestamp);
  return w;
}

Header read_header(ByteReader& r, std::size_t total_size) {
  if (total_size < 4) throw IoError(IoErrorKind::kTruncated, "file shorter than magic");
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get_uint<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError(IoErrorKind::kBadMagic, "not an LSNF file");
  const auto version = r.get_uint<std::uint16_t>();
  if (version != kVersion)
    throw IoError(IoErrorKind::kVersionMismatch, "version " + std::to_string(version) + ", expected " +
                                                     std::to_string(kVersion));
  Header h;
  h.count = r.get_uint<std::uint32_t>();
  h.flags = r.get_uint<std::uint16_t>();
  if (h.flags & ~(kFlagNormals | kFlagPose | kFlagNormalsOnly))
    throw IoError(IoErrorKind::kUnsupportedFlags, "flags 0x" + std::to_string(h.flags));
  if ((h.flags & kFlagNormalsOnly) && !(h.flags & kFlagNormals))
    throw IoError(IoErrorKind::kUnsupportedFlags, "normals-only file without normals");
  Mat3 rot;
  Vec3 t;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) rot(i, c) = r.get_f64();
  for (int c = 0; c < 3; ++c) t[c] = r.get_f64();
  h.timestamp = r.get_f64();
  if (h.flags & kFlagPose) {
    try {
      h.pose = Pose(rot, t);
    } catch (const InvalidArgument& e) {
      throw IoError(IoErrorKind::kParse, e.what());
    }
  }

  const std::uint64_t records = static_cast<std::uint64_t>(h.count) *
                                ((h.flags & kFlagNormalsOnly) ? 1 : ((h.flags & kFlagNormals) ? 2 : 1));
  const std::uint64_t expected = records * 12;
  if (r.remaining() < expected)
    throw IoError(IoErrorKind::kTruncated, "payload has " + std::to_string(r.remaining()) + " bytes, header declares " +
                                               std::to_string(expected));
  if (r.remaining() > expected)
    throw IoError(IoErrorKind::kCountMismatch, std::to_string(r.remaining() - expected) +
                                                   " bytes beyond the declared point count");
  return h;
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrorKind::kMissingFile, path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void dump(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::kWrite, path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoErrorKind::kWrite, path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  frame.validate();
  const bool normals = frame.has_gt();
  auto w = write_header(frame.size(), normals ? kFlagNormals : 0, frame.pose, frame.timestamp,
                        frame.size() * (normals ? 2 : 1));
  for (const auto& p : frame.points) put_vec3_f32(w, p);
  if (normals)
    for (const auto& n : *frame.gt_normals) put_vec3_f32(w, n.vec());
  return w.take();
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const Header h = read_header(r, bytes.size());
  if (h.flags & kFlagNormalsOnly) throw IoError(IoErrorKind::kUnsupportedFlags, "normals-only file is not a frame");
  Frame f;
  f.pose = h.pose;
  f.timestamp = h.timestamp;
  f.points.resize(h.count);
  for (auto& p : f.points) p = get_vec3_f32(r);
  if (h.flags & kFlagNormals) {
    std::vector<UnitVec3> normals;
    normals.reserve(h.count);
    for (std::uint32_t i = 0; i < h.count; ++i) {
      const Vec3 n = get_vec3_f32(r);
      if (!(std::abs(n.norm() - 1.0) <= UnitVec3::kTolerance))
        throw IoError(IoErrorKind::kParse, "ground-truth normal " + std::to_string(i) + " is not unit length");
      normals.emplace_back(n);
    }
    f.gt_normals = std::move(normals);
  }
  return f;
}

void write_frame(const Frame& frame, const fs::path& path) { dump(encode_frame(frame), path); }

Frame read_frame(const fs::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_frame(bytes);
  } catch (const IoError& e) {
    throw IoError(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_normal_field(const NormalField& field, const Frame* owner) {
  if (owner && owner->size() != field.size()) throw InvalidArgument("encode_normal_field: owner length mismatch");
  auto w = write_header(field.size(), kFlagNormals | kFlagNormalsOnly, owner ? owner->pose : std::nullopt,
                        owner ? owner->timestamp : 0.0, field.size());
  for (const auto& n : field.normals) put_vec3_f32(w, n);
  return w.take();
}

NormalField decode_normal_field(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const Header h = read_header(r, bytes.size());
  if (!(h.flags & kFlagNormalsOnly)) throw IoError(IoErrorKind::kUnsupportedFlags, "not a normals-only file");
  NormalField f;
  f.normals.resize(h.count);
  for (auto& n : f.normals) n = get_vec3_f32(r);
  return f;
}

void write_normal_field(const NormalField& field, const fs::path& path, const Frame* owner) {
  dump(encode_normal_field(field, owner), path);
}

NormalField read_normal_field(const fs::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_normal_field(bytes);
  } catch (const IoError& e) {
    throw IoError(e.kind(), path.string() + ": " + e.what());
  }
}

namespace {

YAML::Node load_yaml(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(IoErrorKind::kMissingFile, path.string());
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw IoError(IoErrorKind::kParse, path.string() + ": " + e.what());
  }
}

template <typename T>
T field_as(const YAML::Node& node, const char* key, const fs::path& path) {
  if (!node[key]) throw IoError(IoErrorKind::kParse, path.string() + ": missing key '" + key + "'");
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw IoError(IoErrorKind::kParse, path.string() + ": key '" + key + "': " + e.what());
  }
}

void emit_sensor(YAML::Emitter& out, const SensorConfig& s) {
  out << YAML::Key << "sensor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "beams" << YAML::Value << s.beams;
  out << YAML::Key << "upper_fov_deg" << YAML::Value << s.upper_fov_deg;
  out << YAML::Key << "lower_fov_deg" << YAML::Value << s.lower_fov_deg;
  out << YAML::Key << "horizontal_fov_deg" << YAML::Value << s.horizontal_fov_deg;
  out << YAML::Key << "max_range_m" << YAML::Value << s.max_range_m;
  out << YAML::Key << "points_per_second" << YAML::Value << s.points_per_second;
  out << YAML::Key << "rotation_hz" << YAML::Value << s.rotation_hz;
  out << YAML::Key << "drop_ratio" << YAML::Value << s.drop_ratio;
  out << YAML::Key << "noise_std_m" << YAML::Value << s.noise_std_m;
  out << YAML::EndMap;
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoErrorKind::kWrite, path.string());
  out << text << "\n";
  if (!out) throw IoError(IoErrorKind::kWrite, path.string());
}

}  // namespace

void write_manifest(const SequenceManifest& m, const fs::path& path) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "scene" << YAML::Value << m.scene;
  out << YAML::Key << "split" << YAML::Value << to_string(m.split);
  emit_sensor(out, m.sensor);
  out << YAML::Key << "frames" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : m.frames) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << e.id << YAML::Key << "file"
        << YAML::Value << e.file << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  write_text(out.c_str(), path);
}

SequenceManifest read_manifest(const fs::path& path) {
  const YAML::Node root = load_yaml(path);
  SequenceManifest m;
  m.scene = root["scene"] ? root["scene"].as<std::string>() : "";
  if (root["split"]) {
    try {
      m.split = parse_split(root["split"].as<std::string>());
    } catch (const InvalidArgument& e) {
      throw IoError(IoErrorKind::kParse, path.string() + ": " + e.what());
    }
  }
  if (const auto s = root["sensor"]) {
    auto& c = m.sensor;
    auto opt = [&](const char* key, auto& dst) {
      if (s[key]) dst = field_as<std::decay_t<decltype(dst)>>(s, key, path);
    };
    opt("beams", c.beams);
    opt("upper_fov_deg", c.upper_fov_deg);
    opt("lower_fov_deg", c.lower_fov_deg);
    opt("horizontal_fov_deg", c.horizontal_fov_deg);
    opt("max_range_m", c.max_range_m);
    opt("points_per_second", c.points_per_second);
    opt("rotation_hz", c.rotation_hz);
    opt("drop_ratio", c.drop_ratio);
    opt("noise_std_m", c.noise_std_m);
  }
  const YAML::Node frames = root["frames"];
  if (!frames || !frames.IsSequence()) throw IoError(IoErrorKind::kParse, path.string() + ": missing 'frames' list");
  for (const auto& node : frames) {
    m.frames.push_back(SequenceEntry{field_as<std::int64_t>(node, "id", path), field_as<std::string>(node, "file", path)});
  }
  return m;
}

std::vector<Frame> read_sequence(const fs::path& manifest_path) {
  const SequenceManifest m = read_manifest(manifest_path);
  for (std::size_t i = 1; i < m.frames.size(); ++i) {
    if (m.frames[i].id <= m.frames[i - 1].id)
      throw IoError(IoErrorKind::kOutOfOrder, manifest_path.string() + ": frame id " + std::to_string(m.frames[i].id) +
                                                  " follows " + std::to_string(m.frames[i - 1].id));
  }
  const fs::path dir = manifest_path.parent_path();
  std::vector<Frame> frames;
  frames.reserve(m.frames.size());
  for (const auto& e : m.frames) {
    const fs::path p = dir / e.file;
    if (!fs::exists(p)) throw IoError(IoErrorKind::kMissingFile, p.string());
    frames.push_back(read_frame(p));
    frames.back().frame_id = e.id;
  }
  return frames;
}

void write_field_set(const FieldSet& set, const fs::path& dir) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << set.method;
  out << YAML::Key << "fields" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : set.fields) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << e.id << YAML::Key << "file"
        << YAML::Value << e.file << YAML::Key << "runtime_s" << YAML::Value << e.runtime_s << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  write_text(out.c_str(), dir / kFieldSetFile);
}

FieldSet read_field_set(const fs::path& dir) {
  const fs::path path = dir / kFieldSetFile;
  const YAML::Node root = load_yaml(path);
  FieldSet set;
  set.method = root["method"] ? root["method"].as<std::string>() : "";
  const YAML::Node fields = root["fields"];
  if (!fields || !fields.IsSequence()) throw IoError(IoErrorKind::kParse, path.string() + ": missing 'fields' list");
  for (const auto& node : fields) {
    FieldSetEntry e{field_as<std::int64_t>(node, "id", path), field_as<std::string>(node, "file", path)};
    if (node["runtime_s"]) e.runtime_s = field_as<double>(node, "runtime_s", path);
    set.fields.push_back(e);
  }
  return set;
}

std::vector<NormalField> read_fields(const fs::path& dir, FieldSet* set_out) {
  FieldSet set = read_field_set(dir);
  std::vector<NormalField> out;
  for (const auto& e : set.fields) {
    const fs::path p = dir / e.file;
    if (!fs::exists(p)) throw IoError(IoErrorKind::kMissingFile, p.string());
    out.push_back(read_normal_field(p));
    out.back().frame_id = e.id;
  }
  if (set_out) *set_out = std::move(set);
  return out;
}

Frame read_xyz_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoErrorKind::kMissingFile, path.string());
  Frame f;
  std::vector<UnitVec3> normals;
  bool all_normals = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw IoError(IoErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": not a number");
    if (v.empty()) continue;
    if (v.size() != 3 && v.size() != 6)
      throw IoError(IoErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": expected 3 or 6 values");
    f.points.emplace_back(v[0], v[1], v[2]);
    if (v.size() == 6 && all_normals) {
      try {
        normals.push_back(UnitVec3::normalized(Vec3(v[3], v[4], v[5])));
      } catch (const InvalidArgument&) {
        throw IoError(IoErrorKind::kParse, path.string() + ":" + std::to_string(lineno) + ": zero normal");
      }
    } else {
      all_normals = false;
    }
  }
  if (all_normals && !f.points.empty()) f.gt_normals = std::move(normals);
  return f;
}

}  // namespace lidar_normals
