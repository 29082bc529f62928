#include "axs/signgen.hpp"

#include <algorithm>

#include "axs/error.hpp"
#include "axs/ids.hpp"
#include "axs/text.hpp"

namespace axs {

const std::vector<std::string>& fingerspell_glosses() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> v;
    for (char c = 'A'; c <= 'Z'; ++c) v.push_back(std::string("FS_") + c);
    for (char c = '0'; c <= '9'; ++c) v.push_back(std::string("FS_") + c);
    return v;
  }();
  return all;
}

std::string fingerspell_gloss(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return std::string("FS_") + c;
}

// ---------------------------------------------------------------------------

SignDictionary::SignDictionary(std::vector<SignClip> clips, std::string version) : version_(std::move(version)) {
  bool any_face = false;
  bool all_face = !clips.empty();
  for (auto& clip : clips) {
    const bool face = !clip.frames.empty() && clip.frames.front().face.has_value();
    any_face = any_face || face;
    all_face = all_face && face;
    if (clip.gloss_id.rfind("FS_", 0) != 0) {
      const auto tokens = static_cast<std::size_t>(std::count(clip.gloss_id.begin(), clip.gloss_id.end(), '_')) + 1;
      max_key_tokens_ = std::max(max_key_tokens_, tokens);
    }
    auto id = clip.gloss_id;
    entries_[id] = std::make_shared<const SignClip>(std::move(clip));
  }
  has_face_ = any_face && all_face;
}

const SignClip* SignDictionary::find(const std::string& gloss_id) const {
  const auto it = entries_.find(gloss_id);
  return it == entries_.end() ? nullptr : it->second.get();
}

std::vector<std::string> SignDictionary::missing_fingerspell() const {
  std::vector<std::string> missing;
  for (const auto& g : fingerspell_glosses())
    if (!contains(g)) missing.push_back(g);
  return missing;
}

std::vector<std::string> SignDictionary::gloss_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, clip] : entries_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// text -> glosses

namespace {

// Base letters for U+00C0..U+00FF; '\0' where no letter applies.
constexpr char kLatin1Fold[] =
    "AAAAAAACEEEEIIIIDNOOOOO\0OUUUUYTS"
    "aaaaaaaceeeeiiiidnooooo\0ouuuuyty";

std::string fold_word(std::string_view tok) {
  std::string out;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    const auto c = static_cast<unsigned char>(tok[i]);
    if (c < 0x80) {
      if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out += static_cast<char>(c);
      else if (c >= 'A' && c <= 'Z') out += static_cast<char>(c - 'A' + 'a');
      continue;
    }
    if (c == 0xC3 && i + 1 < tok.size()) {
      const auto c1 = static_cast<unsigned char>(tok[i + 1]);
      if (c1 >= 0x80 && c1 <= 0xBF) {
        const char base = kLatin1Fold[c1 - 0x80];
        if (base) out += static_cast<char>(base >= 'A' && base <= 'Z' ? base - 'A' + 'a' : base);
        ++i;
        continue;
      }
    }
    // other multi-byte characters have no manual-alphabet sign; skip them
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::size_t, std::string>> normalise_words(const std::string& input) {
  std::vector<std::pair<std::size_t, std::string>> out;
  const auto tokens = text::split_whitespace(input);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto w = fold_word(tokens[i]);
    if (!w.empty()) out.emplace_back(i, std::move(w));
  }
  return out;
}

std::vector<Gloss> tokenize_to_glosses(const std::string& input, const SignDictionary& dict,
                                       const GlossOptions& options) {
  std::vector<std::pair<std::size_t, std::string>> words;
  for (auto& w : normalise_words(input))
    if (!options.stopwords.count(w.second)) words.push_back(std::move(w));

  std::vector<Gloss> out;
  std::size_t i = 0;
  while (i < words.size()) {
    bool matched = false;
    for (std::size_t len = std::min(dict.max_key_tokens(), words.size() - i); len >= 2; --len) {
      std::string key = words[i].second;
      for (std::size_t k = 1; k < len; ++k) key += "_" + words[i + k].second;
      key = text::to_upper(key);
      if (dict.contains(key)) {
        out.push_back({key, GlossKind::Dictionary, words[i].first, words[i + len - 1].first});
        i += len;
        matched = true;
        break;
      }
    }
    if (matched) continue;

    const auto& w = words[i].second;
    const auto upper = text::to_upper(w);
    if (dict.contains(upper)) {
      out.push_back({upper, GlossKind::Dictionary, words[i].first, words[i].first});
    } else if (w.size() > 1 && w.back() == 's' && dict.contains(upper.substr(0, upper.size() - 1))) {
      out.push_back({upper.substr(0, upper.size() - 1), GlossKind::Dictionary, words[i].first, words[i].first});
    } else {
      for (char c : w) out.push_back({fingerspell_gloss(c), GlossKind::Fingerspell, words[i].first, words[i].first});
    }
    ++i;
  }
  return out;
}

const SignClip& lookup_sign(const Gloss& gloss, const SignDictionary& dict) {
  const auto* clip = dict.find(gloss.gloss_id);
  if (!clip) throw Error(Errc::MissingSign, gloss.gloss_id + " not in dictionary " + dict.version());
  return *clip;
}

// ---------------------------------------------------------------------------
// animation assembly

void check_signing_speed(double speed) {
  if (!(speed >= kMinSigningSpeed && speed <= kMaxSigningSpeed))
    throw Error(Errc::InvalidParams, "signing speed must be in [0.25, 2.0]");
}

namespace {

template <std::size_t N>
void lerp_into(std::array<Vec3f, N>& out, const std::array<Vec3f, N>& a, const std::array<Vec3f, N>& b,
               double alpha) {
  for (std::size_t i = 0; i < N; ++i) {
    out[i].x = static_cast<float>((1.0 - alpha) * a[i].x + alpha * b[i].x);
    out[i].y = static_cast<float>((1.0 - alpha) * a[i].y + alpha * b[i].y);
    out[i].z = static_cast<float>((1.0 - alpha) * a[i].z + alpha * b[i].z);
  }
}

Keyframe blend(const Keyframe& a, const Keyframe& b, double alpha) {
  Keyframe k;
  lerp_into(k.pose, a.pose, b.pose, alpha);
  lerp_into(k.left_hand, a.left_hand, b.left_hand, alpha);
  lerp_into(k.right_hand, a.right_hand, b.right_hand, alpha);
  if (a.face && b.face) {
    k.face.emplace();
    lerp_into(*k.face, *a.face, *b.face, alpha);
  }
  return k;
}

void retime(AnimationSequence& seq, double speed) {
  seq.speed = speed;
  const double step = 1.0 / (kClipFps * speed);
  for (std::size_t k = 0; k < seq.frames.size(); ++k) seq.frames[k].t = static_cast<double>(k) * step;
  seq.total_duration = sequence_duration(seq.frames.size(), speed);
}

}  // namespace

AnimationSequence assemble_animation(const std::vector<Gloss>& glosses, const SignDictionary& dict, double speed,
                                     int transition_frames) {
  if (glosses.empty()) throw Error(Errc::EmptySequence, "no glosses to animate");
  check_signing_speed(speed);
  if (transition_frames < 0) throw Error(Errc::InvalidParams, "transition_frames must be >= 0");

  AnimationSequence seq;
  seq.sequence_id = next_id();
  seq.dictionary_version = dict.version();
  seq.glosses = glosses;
  seq.transition_frames = transition_frames;

  for (std::size_t g = 0; g < glosses.size(); ++g) {
    const SignClip& clip = lookup_sign(glosses[g], dict);
    if (g > 0) {
      const Keyframe& from = seq.frames.back();
      const Keyframe& to = clip.frames.front();
      const Keyframe from_copy = from;
      for (int j = 1; j <= transition_frames; ++j)
        seq.frames.push_back(blend(from_copy, to, static_cast<double>(j) / (transition_frames + 1)));
    }
    seq.clips.push_back({clip.gloss_id, seq.frames.size(), clip.frames.size()});
    seq.frames.insert(seq.frames.end(), clip.frames.begin(), clip.frames.end());
  }
  retime(seq, speed);
  return seq;
}

double sequence_duration(std::size_t frame_count, double speed) {
  const double step = 1.0 / (kClipFps * speed);
  return frame_count == 0 ? 0.0 : static_cast<double>(frame_count - 1) * step;
}

AnimationSequence respeed(const AnimationSequence& seq, double speed) {
  check_signing_speed(speed);
  AnimationSequence out = seq;
  retime(out, speed);
  return out;
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void ReplayBuffer::push(std::shared_ptr<const AnimationSequence> seq) {
  std::lock_guard lock(mu_);
  ring_.push_back(std::move(seq));
  while (ring_.size() > capacity_) ring_.pop_front();
}

AnimationSequence ReplayBuffer::replay(const std::string& sequence_id, std::optional<double> speed) const {
  std::shared_ptr<const AnimationSequence> found;
  {
    std::lock_guard lock(mu_);
    for (const auto& s : ring_)
      if (s->sequence_id == sequence_id) found = s;
  }
  if (!found) throw Error(Errc::NotInBuffer, sequence_id);
  return speed ? respeed(*found, *speed) : *found;
}

std::size_t ReplayBuffer::size() const {
  std::lock_guard lock(mu_);
  return ring_.size();
}

}  // namespace axs
