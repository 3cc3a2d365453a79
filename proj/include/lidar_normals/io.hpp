#pragma once

#include "lidar_normals/core.hpp"
#include "lidar_normals/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lidar_normals {

enum class IoErrorKind {
  kBadMagic,
  kVersionMismatch,
  kUnsupportedFlags,
  kTruncated,
  kCountMismatch,
  kMissingFile,
  kOutOfOrder,
  kParse,
  kWrite,
};

const char* to_string(IoErrorKind kind);

class IoError : public std::runtime_error {
 public:
  IoError(IoErrorKind kind, const std::string& what);
  IoErrorKind kind() const { return kind_; }

 private:
  IoErrorKind kind_;
};

/// Binary frame layout (little-endian):
///   "LSNF" | u16 version | u32 point_count | u16 flags |
///   12 x f64 pose (R row-major, then t) | f64 timestamp |
///   point_count x 3 x f32 positions (absent when kFlagNormalsOnly) |
///   point_count x 3 x f32 normals (when kFlagNormals)
namespace frame_format {
inline constexpr char kMagic[4] = {'L', 'S', 'N', 'F'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kFlagNormals = 1u << 0;
inline constexpr std::uint16_t kFlagPose = 1u << 1;
inline constexpr std::uint16_t kFlagNormalsOnly = 1u << 2;
inline constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 2 + 12 * 8 + 8;
}  // namespace frame_format

std::vector<std::uint8_t> encode_frame(const Frame& frame);
/// frame_id is not part of the format and is returned as 0.
Frame decode_frame(std::span<const std::uint8_t> bytes);

void write_frame(const Frame& frame, const std::filesystem::path& path);
Frame read_frame(const std::filesystem::path& path);

/// A normal field stored with the normals-only convention. The owner frame,
/// when given, supplies the pose and timestamp written to the header.
std::vector<std::uint8_t> encode_normal_field(const NormalField& field, const Frame* owner = nullptr);
NormalField decode_normal_field(std::span<const std::uint8_t> bytes);
void write_normal_field(const NormalField& field, const std::filesystem::path& path, const Frame* owner = nullptr);
NormalField read_normal_field(const std::filesystem::path& path);

struct SequenceEntry {
  std::int64_t id;
  std::string file;  // relative to the manifest directory
};

struct SequenceManifest {
  std::string scene;
  Split split = Split::kTrain;
  SensorConfig sensor;
  std::vector<SequenceEntry> frames;
};

void write_manifest(const SequenceManifest& manifest, const std::filesystem::path& path);
SequenceManifest read_manifest(const std::filesystem::path& path);

/// Frames in manifest order with ids from the manifest.
std::vector<Frame> read_sequence(const std::filesystem::path& manifest_path);

/// Directory of per-frame normal fields written by the estimate/refine tools.
struct FieldSetEntry {
  std::int64_t id;
  std::string file;
  double runtime_s = 0.0;
};

struct FieldSet {
  std::string method;
  std::vector<FieldSetEntry> fields;
};

inline constexpr const char* kFieldSetFile = "fields.yaml";

void write_field_set(const FieldSet& set, const std::filesystem::path& dir);
FieldSet read_field_set(const std::filesystem::path& dir);
std::vector<NormalField> read_fields(const std::filesystem::path& dir, FieldSet* set = nullptr);

/// Whitespace-separated "x y z [nx ny nz]" lines; '#' starts a comment.
/// Normals, when present on every line, are normalized into gt_normals.
Frame read_xyz_text(const std::filesystem::path& path);

}  // namespace lidar_normals
