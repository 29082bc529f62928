#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "axs/signgen.hpp"

namespace axs {

// Sign dictionary artifact, little-endian throughout.
//
//   header   magic "AXSDICT\0", u32 format version, u32 entry count, u32 fps,
//            u32 flags (bit 0: face present), u32 pose/hand/face landmark
//            counts, u64 index offset, u64 index size, u64 payload offset,
//            u64 payload size, u32 CRC-32 of the preceding header bytes
//   index    per entry: u16 gloss length + bytes, u16 source length + bytes,
//            u64 payload-relative offset, u32 frame count, u32 CRC-32 of the
//            entry's payload bytes
//   payload  per frame: f64 t, then f32 x/y/z for pose, left hand, right
//            hand and (when flagged) face landmarks
//
// The dictionary version string is derived from the CRC-32 of index+payload.

inline constexpr char kDictionaryMagic[8] = {'A', 'X', 'S', 'D', 'I', 'C', 'T', '\0'};
inline constexpr std::uint32_t kDictionaryFormatVersion = 1;

struct ClipRecord {
  std::string gloss_id;
  std::string source_file;
  std::size_t frame_count = 0;
  double duration = 0.0;
  std::uint32_t checksum = 0;
};

struct DictionaryEntry {
  SignClip clip;
  std::string source_file;
};

/// Serialises entries in the given order. Face data is written only when
/// every clip carries it.
std::vector<std::uint8_t> serialize_dictionary(std::span<const DictionaryEntry> entries);

/// Writes the artifact and returns one record per entry.
std::vector<ClipRecord> write_dictionary(const std::filesystem::path& path, std::span<const DictionaryEntry> entries);

/// Parses an artifact held in memory. Throws Error(PARSE_ERROR) on any
/// structural or checksum problem.
std::vector<DictionaryEntry> parse_dictionary(std::span<const std::uint8_t> bytes, std::string* version = nullptr);

/// Loads a dictionary for serving. With `require_fingerspell` a missing
/// manual-alphabet letter is an INCOMPLETE_FINGERSPELL_SET error.
SignDictionary load_dictionary(const std::filesystem::path& path, bool require_fingerspell = true);

struct Violation {
  std::string entry;  // gloss id, or "<header>"
  std::string kind;   // magic, version, checksum, frame_count, fps_spacing, landmark_count, fingerspell, round_trip
  std::string detail;
};

struct ValidationReport {
  std::size_t entries = 0;
  std::string version;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_dictionary(const std::filesystem::path& path);

/// Inspection dump: header fields plus every entry with its frames.
nlohmann::json export_dictionary_json(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace axs
