#include <doctest.h>

#include <cmath>

#include "axs/error.hpp"
#include "axs/signgen.hpp"
#include "axs/text.hpp"
#include "test_support.hpp"

using namespace axs;
using axs_test::make_dictionary;

namespace {

std::vector<std::string> ids(const std::vector<Gloss>& g) {
  std::vector<std::string> out;
  for (const auto& x : g) out.push_back(x.gloss_id);
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::ParseError;
}

/// Exhaustive search for the segmentation the greedy rule must pick: at each
/// position try every key length from the longest down.
std::vector<std::string> greedy_oracle(const std::vector<std::string>& words, const SignDictionary& dict) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < words.size();) {
    std::size_t best = 0;
    for (std::size_t len = words.size() - i; len >= 1; --len) {
      std::string key;
      for (std::size_t k = 0; k < len; ++k) key += (k ? "_" : "") + text::to_upper(words[i + k]);
      if (dict.contains(key)) {
        best = len;
        out.push_back(key);
        break;
      }
    }
    if (best == 0) {
      const auto up = text::to_upper(words[i]);
      if (up.size() > 1 && up.back() == 'S' && dict.contains(up.substr(0, up.size() - 1))) {
        out.push_back(up.substr(0, up.size() - 1));
      } else {
        for (char c : up) out.push_back(std::string("FS_") + c);
      }
      best = 1;
    }
    i += best;
  }
  return out;
}

}  // namespace

TEST_CASE("longest multi-word key wins") {
  auto dict = make_dictionary({"ACTION_ITEM", "REVIEW", "ACTION"});
  CHECK(ids(tokenize_to_glosses("Review the action item.", dict)) == std::vector<std::string>{"REVIEW", "ACTION_ITEM"});
}

TEST_CASE("absent word is fingerspelled") {
  auto dict = make_dictionary({"HELLO"});
  const auto g = tokenize_to_glosses("XR", dict);
  CHECK(ids(g) == std::vector<std::string>{"FS_X", "FS_R"});
  CHECK(g[0].kind == GlossKind::Fingerspell);
  CHECK(tokenize_to_glosses("", dict).empty());
}

TEST_CASE("plural s falls back to the singular sign") {
  auto dict = make_dictionary({"SLIDE"});
  CHECK(ids(tokenize_to_glosses("slides", dict)) == std::vector<std::string>{"SLIDE"});
}

TEST_CASE("accents fold before lookup") {
  auto dict = make_dictionary({"EQUIPE"});
  CHECK(ids(tokenize_to_glosses("Équipe!", dict)) == std::vector<std::string>{"EQUIPE"});
}

TEST_CASE("tokenizer agrees with the exhaustive oracle") {
  auto dict = make_dictionary({"GOOD", "GOOD_MORNING", "GOOD_MORNING_EVERYONE", "MORNING", "THANK_YOU", "TEAM"});
  for (const char* s : {"good morning everyone", "good morning team", "thank you team", "thank good",
                        "teams good mornings", "morning good morning"}) {
    std::vector<std::string> words;
    for (auto& [i, w] : normalise_words(s)) words.push_back(w);
    CHECK(ids(tokenize_to_glosses(s, dict)) == greedy_oracle(words, dict));
  }
}

TEST_CASE("lookup") {
  auto dict = make_dictionary({"HELLO"});
  CHECK(lookup_sign({"HELLO"}, dict).gloss_id == "HELLO");
  CHECK(lookup_sign({"FS_Q", GlossKind::Fingerspell}, dict).gloss_id == "FS_Q");
  auto other = make_dictionary({});
  CHECK(code_of([&] { lookup_sign({"HELLO"}, other); }) == Errc::MissingSign);
}

TEST_CASE("two 30-frame clips at speed 1") {
  auto dict = make_dictionary({"A1", "B1"}, 30);
  auto seq = assemble_animation({{"A1"}, {"B1"}}, dict, 1.0);
  CHECK(seq.frames.size() == 65);
  CHECK(seq.total_duration == doctest::Approx(64.0 / 30.0).epsilon(1e-12));
  CHECK(seq.clips[1].first_frame == 35);
  for (std::size_t k = 0; k < seq.frames.size(); ++k)
    CHECK(seq.frames[k].t == doctest::Approx(static_cast<double>(k) / 30.0));
}

TEST_CASE("one 60-frame clip at half speed") {
  auto dict = make_dictionary({"LONG"}, 60);
  auto seq = assemble_animation({{"LONG"}}, dict, 0.5);
  CHECK(std::abs(seq.total_duration - (59.0 / 30.0) / 0.5) < 1e-9);
  CHECK(code_of([&] { assemble_animation({}, dict); }) == Errc::EmptySequence);
  CHECK(code_of([&] { assemble_animation({{"LONG"}}, dict, 3.0); }) == Errc::InvalidParams);
}

TEST_CASE("transition frames interpolate between clip ends") {
  auto dict = make_dictionary({"A1", "B1"}, 4);
  auto seq = assemble_animation({{"A1"}, {"B1"}}, dict, 1.0, 3);
  const auto& last = dict.find("A1")->frames.back();
  const auto& first = dict.find("B1")->frames.front();
  const auto& mid = seq.frames[4 + 1];  // second of three transition frames
  CHECK(mid.pose[0].x == doctest::Approx(0.5 * (last.pose[0].x + first.pose[0].x)));
}

TEST_CASE("respeed and replay") {
  auto dict = make_dictionary({"HELLO"}, 30);
  auto seq = std::make_shared<AnimationSequence>(assemble_animation({{"HELLO"}}, dict));
  ReplayBuffer rb(16);
  rb.push(seq);
  auto slow = rb.replay(seq->sequence_id, 0.5);
  CHECK(slow.total_duration == doctest::Approx(2 * seq->total_duration));
  CHECK(slow.frames.size() == seq->frames.size());
  CHECK(slow.clips.size() == seq->clips.size());
  CHECK(rb.replay(seq->sequence_id).speed == 1.0);
  for (int i = 0; i < 17; ++i) rb.push(std::make_shared<AnimationSequence>(assemble_animation({{"HELLO"}}, dict)));
  CHECK(code_of([&] { rb.replay(seq->sequence_id); }) == Errc::NotInBuffer);
  CHECK(rb.size() == 16);
}

TEST_CASE("sequence_duration arithmetic") {
  CHECK(sequence_duration(0, 1.0) == 0.0);
  CHECK(sequence_duration(1, 1.0) == 0.0);
  CHECK(sequence_duration(31, 1.0) == doctest::Approx(1.0));
  CHECK(sequence_duration(31, 2.0) == doctest::Approx(0.5));
}
