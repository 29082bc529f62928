#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace axs {

/// Knobs for procedurally generated landmark recordings. The generator
/// stands in for holistic-landmark extraction output when no recorded corpus
/// is at hand; motion is a deterministic function of the gloss and seed.
struct SyntheticSignOptions {
  double fps = 30.0;
  std::size_t moving_frames = 24;
  std::size_t lead_static = 6;
  std::size_t trail_static = 6;
  bool with_face = false;
  /// Every n-th frame reports a missing left hand (0 = never).
  std::size_t drop_left_hand_every = 0;
  std::uint64_t seed = 0;
};

/// A landmark document in the compiler's input schema (image coordinates).
nlohmann::json synthesize_landmark_json(const std::string& gloss, const SyntheticSignOptions& options = {});

/// Writes one file per gloss ("<GLOSS>.json") and returns the paths.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          const std::vector<std::string>& glosses,
                                                          const SyntheticSignOptions& options = {});

/// The 36 manual-alphabet glosses followed by `vocabulary`.
std::vector<std::string> corpus_glosses(const std::vector<std::string>& vocabulary);

}  // namespace axs
