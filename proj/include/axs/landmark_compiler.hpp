#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "axs/dictionary_io.hpp"
#include "axs/skeleton.hpp"

namespace axs {

/// Image-normalised coordinates have y pointing down and x/y scaled by the
/// frame width/height; world coordinates are taken as-is.
enum class CoordConvention { Image, World };

struct LandmarkFile {
  std::string gloss_id;
  double fps = 30.0;
  CoordConvention coords = CoordConvention::Image;
  std::string source;
  std::vector<SkeletonFrame> frames;
};

/// Input document, one per source video:
///   {"gloss": "HELLO", "fps": 30, "coords": "image"|"world",
///    "image_width": 1920, "image_height": 1080,            (optional)
///    "frames": [{"t": 0.0,                                  (optional)
///                "pose": [[x,y,z,visibility] x33],
///                "left_hand": [[x,y,z] x21] | null,
///                "right_hand": [[x,y,z] x21] | null,
///                "face": [[x,y,z] x468] | null}]}
/// Image coordinates are converted on parse (y flipped, x scaled by the
/// aspect ratio when the image size is given).
/// Errors: PARSE_ERROR naming the source and frame index, WRONG_LANDMARK_COUNT.
LandmarkFile parse_landmark_json(const nlohmann::json& doc, const std::string& source);
LandmarkFile parse_landmark_file(const std::filesystem::path& path);

struct NormalizeOptions {
  bool keep_face = false;
};

/// Moves the shoulder midpoint to the origin and scales to unit shoulder
/// width, hold-fills missing hands and reduces a 468-point face to 68.
/// Errors: DEGENERATE_POSE when a frame's shoulders (nearly) coincide.
std::vector<SkeletonFrame> normalize_frames(std::span<const SkeletonFrame> frames,
                                            const NormalizeOptions& options = {});

/// Linear interpolation onto t = k/30 for k = 0 .. floor(span * 30), with
/// times re-based to start at zero. Frames with a repeated timestamp are
/// dropped (first one kept). Errors: TOO_SHORT when span < 1/30 s.
std::vector<SkeletonFrame> resample_30fps(std::span<const SkeletonFrame> frames);

inline constexpr double kDefaultTrimThreshold = 0.002;

/// Drops idle lead-in and lead-out frames (mean landmark displacement to the
/// neighbouring frame below `threshold`), never going below two frames.
std::vector<SkeletonFrame> trim_idle(std::span<const SkeletonFrame> frames,
                                     double threshold = kDefaultTrimThreshold);

/// Mean Euclidean displacement over pose and hand landmarks.
double mean_displacement(const SkeletonFrame& a, const SkeletonFrame& b);

/// Converts compiler frames to single-precision keyframes at t = k/30.
SignClip to_sign_clip(const std::string& gloss_id, std::span<const SkeletonFrame> frames);

struct CompileOptions {
  bool strict = false;
  double trim_threshold = kDefaultTrimThreshold;
  bool keep_face = false;
  std::size_t reference_vocabulary = 750;
};

/// parse -> normalize -> resample -> trim -> clip, for one file.
SignClip build_clip(const LandmarkFile& file, const CompileOptions& options = {});

struct CompileFailure {
  std::string path;
  std::string error;
};

struct CompileReport {
  std::size_t files_seen = 0;
  std::size_t entries_written = 0;
  std::vector<ClipRecord> records;
  std::vector<std::string> duplicates;
  std::vector<std::string> warnings;
  std::vector<CompileFailure> failures;
  bool fingerspell_complete = false;
  std::vector<std::string> missing_fingerspell;
  std::size_t reference_vocabulary = 750;

  std::string render() const;
  nlohmann::json to_json() const;
};

/// Compiles every *.json landmark file under `input_dir` (sorted by path;
/// a later file with the same gloss replaces the earlier one).
/// Errors: NO_INPUTS, IO_ERROR, and with `strict` INCOMPLETE_FINGERSPELL_SET.
CompileReport compile_dictionary(const std::filesystem::path& input_dir, const std::filesystem::path& output_path,
                                 const CompileOptions& options = {});

}  // namespace axs
