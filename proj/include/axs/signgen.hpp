#pragma once

#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "axs/skeleton.hpp"

namespace axs {

inline constexpr double kMinSigningSpeed = 0.25;
inline constexpr double kMaxSigningSpeed = 2.0;
inline constexpr int kDefaultTransitionFrames = 5;

struct SignClip {
  std::string gloss_id;
  std::vector<Keyframe> frames;  // frames[k].t == k / 30

  double duration() const noexcept {
    return frames.size() < 2 ? 0.0 : static_cast<double>(frames.size() - 1) / kClipFps;
  }
};

/// "FS_A" .. "FS_Z", "FS_0" .. "FS_9".
const std::vector<std::string>& fingerspell_glosses();
std::string fingerspell_gloss(char c);  // c in A-Z / 0-9 (either case)

/// Immutable gloss -> clip store shared read-only across sessions.
class SignDictionary {
 public:
  SignDictionary() = default;
  SignDictionary(std::vector<SignClip> clips, std::string version);

  const SignClip* find(const std::string& gloss_id) const;
  bool contains(const std::string& gloss_id) const { return find(gloss_id) != nullptr; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& version() const noexcept { return version_; }
  std::size_t max_key_tokens() const noexcept { return max_key_tokens_; }
  bool has_face() const noexcept { return has_face_; }

  std::vector<std::string> missing_fingerspell() const;
  bool fingerspell_complete() const { return missing_fingerspell().empty(); }

  /// Sorted gloss ids.
  std::vector<std::string> gloss_ids() const;

 private:
  std::unordered_map<std::string, std::shared_ptr<const SignClip>> entries_;
  std::string version_;
  std::size_t max_key_tokens_ = 1;
  bool has_face_ = false;
};

enum class GlossKind { Dictionary, Fingerspell };

struct Gloss {
  std::string gloss_id;
  GlossKind kind = GlossKind::Dictionary;
  std::size_t span_first = 0;  // indices into the whitespace tokens of the input
  std::size_t span_last = 0;

  friend bool operator==(const Gloss&, const Gloss&) = default;
};

struct GlossOptions {
  std::unordered_set<std::string> stopwords = {"a", "an", "the"};
};

/// Lowercases, strips punctuation and folds Latin-1 accents so each word is
/// plain [a-z0-9]. Returns (source token index, normalised word) pairs with
/// empty words removed.
std::vector<std::pair<std::size_t, std::string>> normalise_words(const std::string& text);

/// Greedy longest match over multi-word keys (joined with '_'), then single
/// words with plural-'s' stripping; anything else is fingerspelled.
std::vector<Gloss> tokenize_to_glosses(const std::string& text, const SignDictionary& dict,
                                       const GlossOptions& options = {});

/// Throws Error(MISSING_SIGN) when the gloss is not in this dictionary.
const SignClip& lookup_sign(const Gloss& gloss, const SignDictionary& dict);

struct ClipSpan {
  std::string gloss_id;
  std::size_t first_frame = 0;
  std::size_t frame_count = 0;
};

/// Concatenated clips with linear transitions. Frame k sits at
/// t = k / (30 * speed); the frames themselves do not change with speed.
struct AnimationSequence {
  std::string sequence_id;
  std::string utterance_id;
  std::string speaker_id;
  std::string dictionary_version;
  std::vector<Gloss> glosses;
  std::vector<ClipSpan> clips;
  std::vector<Keyframe> frames;
  double speed = 1.0;
  int transition_frames = kDefaultTransitionFrames;
  double total_duration = 0.0;

  double playback_fps() const noexcept { return kClipFps * speed; }
};

/// Throws Error(INVALID_PARAMS) outside [0.25, 2.0].
void check_signing_speed(double speed);

/// Errors: EMPTY_SEQUENCE on no glosses, INVALID_PARAMS on a bad speed,
/// MISSING_SIGN on a gloss the dictionary lacks.
AnimationSequence assemble_animation(const std::vector<Gloss>& glosses, const SignDictionary& dict,
                                     double speed = 1.0, int transition_frames = kDefaultTransitionFrames);

/// (frame_count - 1) / (30 * speed); the duration respeed() would produce.
double sequence_duration(std::size_t frame_count, double speed);

/// Same frames retimed for another playback speed.
AnimationSequence respeed(const AnimationSequence& seq, double speed);

/// Fixed-capacity ring of recent sequences; the oldest is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 16);

  void push(std::shared_ptr<const AnimationSequence> seq);

  /// Errors: NOT_IN_BUFFER when evicted or never stored.
  AnimationSequence replay(const std::string& sequence_id, std::optional<double> speed = std::nullopt) const;

  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::deque<std::shared_ptr<const AnimationSequence>> ring_;
};

}  // namespace axs
