#include <doctest.h>

#include <cmath>
#include <fstream>

#include "axs/dictionary_io.hpp"
#include "axs/error.hpp"
#include "axs/landmark_compiler.hpp"
#include "axs/synthetic_signs.hpp"
#include "test_support.hpp"

using namespace axs;
using json = nlohmann::json;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::ParseError;
}

/// World-coordinate frame: shoulders at (0.4, 0.5) and (0.6, 0.5), every
/// other landmark offset by `shift` along x.
SkeletonFrame world_frame(double t, double shift) {
  SkeletonFrame f;
  f.t = t;
  for (std::size_t i = 0; i < kPoseLandmarks; ++i) f.pose[i] = {0.5 + shift + 0.001 * i, 0.6 + 0.002 * i, 0.0};
  f.pose[kLeftShoulder] = {0.4, 0.5, 0.0};
  f.pose[kRightShoulder] = {0.6, 0.5, 0.0};
  std::array<Vec3d, kHandLandmarks> h{};
  for (std::size_t i = 0; i < kHandLandmarks; ++i) h[i] = {0.3 + shift, 0.2 + 0.01 * i, 0.05};
  f.left_hand = h;
  f.right_hand = h;
  return f;
}

json frame_json(const SkeletonFrame& f) {
  json pose = json::array(), lh = json::array(), rh = json::array();
  for (const auto& p : f.pose) pose.push_back({p.x, p.y, p.z, 1.0});
  for (const auto& p : *f.left_hand) lh.push_back({p.x, p.y, p.z});
  for (const auto& p : *f.right_hand) rh.push_back({p.x, p.y, p.z});
  return {{"t", f.t}, {"pose", pose}, {"left_hand", lh}, {"right_hand", rh}, {"face", nullptr}};
}

json doc(const std::string& gloss, const std::vector<SkeletonFrame>& frames, double fps = 30) {
  json fr = json::array();
  for (const auto& f : frames) fr.push_back(frame_json(f));
  return {{"gloss", gloss}, {"fps", fps}, {"coords", "world"}, {"frames", fr}};
}

double dist(const Vec3d& a, const Vec3d& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

void write_json(const std::filesystem::path& p, const json& j) { std::ofstream(p) << j.dump(); }

}  // namespace

TEST_CASE("parse a valid 2-frame file") {
  auto lf = parse_landmark_json(doc("HELLO", {world_frame(0, 0), world_frame(1.0 / 30, 0.01)}), "mem");
  CHECK(lf.gloss_id == "HELLO");
  CHECK(lf.frames.size() == 2);
}

TEST_CASE("parse errors") {
  auto d = doc("HELLO", {world_frame(0, 0)});
  d["frames"][0]["pose"].erase(0);
  CHECK(code_of([&] { parse_landmark_json(d, "mem"); }) == Errc::WrongLandmarkCount);
  auto e = doc("HELLO", {world_frame(0, 0)});
  e.erase("gloss");
  CHECK(code_of([&] { parse_landmark_json(e, "mem"); }) == Errc::ParseError);
}

TEST_CASE("image coordinates flip y") {
  json d = synthesize_landmark_json("HELLO");
  const double y_img = d["frames"][0]["pose"][0][1].get<double>();
  auto lf = parse_landmark_json(d, "mem");
  CHECK(lf.frames[0].pose[0].y == doctest::Approx(-y_img));
}

TEST_CASE("normalisation puts the shoulders at +-0.5") {
  std::vector<SkeletonFrame> in{world_frame(0, 0)};
  auto out = normalize_frames(in);
  const auto& l = out[0].pose[kLeftShoulder];
  const auto& r = out[0].pose[kRightShoulder];
  CHECK(std::abs(std::abs(l.x) - 0.5) < 1e-12);
  CHECK(std::abs(l.x + r.x) < 1e-12);
  CHECK(std::abs(l.y) < 1e-12);
  CHECK(std::abs(r.y) < 1e-12);
}

TEST_CASE("normalisation is a similarity transform") {
  std::vector<SkeletonFrame> in{world_frame(0, 0.03)};
  auto out = normalize_frames(in);
  const double k = dist(out[0].pose[0], out[0].pose[20]) / dist(in[0].pose[0], in[0].pose[20]);
  for (std::size_t i = 0; i < kPoseLandmarks; i += 3)
    for (std::size_t j = i + 1; j < kPoseLandmarks; j += 5)
      CHECK(dist(out[0].pose[i], out[0].pose[j]) == doctest::Approx(k * dist(in[0].pose[i], in[0].pose[j])));
  CHECK(k == doctest::Approx(1.0 / 0.2));
}

TEST_CASE("normalisation is idempotent") {
  std::vector<SkeletonFrame> in{world_frame(0, 0.1), world_frame(0.1, 0.2)};
  auto once = normalize_frames(in);
  auto twice = normalize_frames(once);
  for (std::size_t f = 0; f < once.size(); ++f)
    for (std::size_t i = 0; i < kPoseLandmarks; ++i) CHECK(dist(once[f].pose[i], twice[f].pose[i]) < 1e-9);
}

TEST_CASE("coincident shoulders") {
  auto f = world_frame(0, 0);
  f.pose[kRightShoulder] = f.pose[kLeftShoulder];
  std::vector<SkeletonFrame> in{f};
  CHECK(code_of([&] { normalize_frames(in); }) == Errc::DegeneratePose);
}

TEST_CASE("15 fps, 10 frames resamples to 19 frames on a linear path") {
  std::vector<SkeletonFrame> in;
  for (int i = 0; i < 10; ++i) in.push_back(world_frame(i / 15.0, 0.1 * i / 15.0));
  auto out = resample_30fps(in);
  REQUIRE(out.size() == 19);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double t = static_cast<double>(k) / 30.0;
    CHECK(std::abs(out[k].t - t) < 1e-12);
    CHECK(std::abs(out[k].pose[0].x - (0.5 + 0.1 * t)) < 1e-9);
    CHECK(std::abs((*out[k].left_hand)[3].x - (0.3 + 0.1 * t)) < 1e-9);
  }
}

TEST_CASE("30 fps input is a fixed point") {
  std::vector<SkeletonFrame> in;
  for (int i = 0; i < 8; ++i) in.push_back(world_frame(i / 30.0, 0.01 * i));
  auto out = resample_30fps(in);
  REQUIRE(out.size() == in.size());
  for (std::size_t k = 0; k < in.size(); ++k)
    for (std::size_t i = 0; i < kPoseLandmarks; ++i) CHECK(dist(in[k].pose[i], out[k].pose[i]) < 1e-12);
  std::vector<SkeletonFrame> one{world_frame(0, 0)};
  CHECK(code_of([&] { resample_30fps(one); }) == Errc::TooShort);
}

TEST_CASE("trim keeps the moving middle") {
  std::vector<SkeletonFrame> in;
  for (int i = 0; i < 10; ++i) in.push_back(world_frame(in.size() / 30.0, 0.0));
  for (int i = 1; i <= 20; ++i) in.push_back(world_frame(in.size() / 30.0, 0.05 * i));
  for (int i = 0; i < 10; ++i) in.push_back(world_frame(in.size() / 30.0, 1.0));
  auto out = trim_idle(in, 0.002);
  CHECK(out.size() >= 19);
  CHECK(out.size() <= 21);
  CHECK(trim_idle(in, 0.0).size() == in.size());
  std::vector<SkeletonFrame> still(12, world_frame(0, 0));
  auto two = trim_idle(still, 0.002);
  CHECK(two.size() == 2);
}

TEST_CASE("compile three files, a duplicate, and validate") {
  axs_test::TempDir dir("compile");
  const auto in = dir.path / "in";
  std::filesystem::create_directories(in);
  write_json(in / "a.json", synthesize_landmark_json("HELLO"));
  write_json(in / "b.json", synthesize_landmark_json("TEAM"));
  write_json(in / "c.json", synthesize_landmark_json("REVIEW"));
  auto rep = compile_dictionary(in, dir.path / "three.axsdict");
  CHECK(rep.entries_written == 3);
  CHECK(rep.failures.empty());
  CHECK_FALSE(rep.fingerspell_complete);

  auto other = synthesize_landmark_json("HELLO", {.seed = 9});
  write_json(in / "d.json", other);
  auto rep2 = compile_dictionary(in, dir.path / "dup.axsdict");
  CHECK(rep2.entries_written == 3);
  REQUIRE(rep2.duplicates.size() == 1);
  CHECK(rep2.duplicates[0] == "HELLO");
  // Later file wins.
  auto entries = parse_dictionary(read_file_bytes(dir.path / "dup.axsdict"));
  for (const auto& e : entries)
    if (e.clip.gloss_id == "HELLO") CHECK(e.source_file == "d.json");
}

TEST_CASE("validation catches truncation and a missing letter") {
  axs_test::TempDir dir("validate");
  auto glosses = corpus_glosses({"HELLO"});
  write_synthetic_corpus(dir.path / "in", glosses);
  auto rep = compile_dictionary(dir.path / "in", dir.path / "full.axsdict", {.strict = true});
  CHECK(rep.fingerspell_complete);
  CHECK(validate_dictionary(dir.path / "full.axsdict").ok());

  auto bytes = read_file_bytes(dir.path / "full.axsdict");
  bytes.resize(bytes.size() - 100);
  std::ofstream(dir.path / "cut.axsdict", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                                   static_cast<std::streamsize>(bytes.size()));
  auto cut = validate_dictionary(dir.path / "cut.axsdict");
  CHECK_FALSE(cut.ok());
  bool checksum = false;
  for (const auto& v : cut.violations) checksum = checksum || v.kind == "checksum";
  CHECK(checksum);

  std::filesystem::remove(dir.path / "in" / "FS_Q.json");
  compile_dictionary(dir.path / "in", dir.path / "noq.axsdict");
  auto noq = validate_dictionary(dir.path / "noq.axsdict");
  bool fs = false;
  for (const auto& v : noq.violations) fs = fs || (v.kind == "fingerspell" && v.entry == "FS_Q");
  CHECK(fs);
  CHECK(code_of([&] { compile_dictionary(dir.path / "in", dir.path / "x.axsdict", {.strict = true}); }) ==
        Errc::IncompleteFingerspellSet);
  CHECK(code_of([&] { load_dictionary(dir.path / "noq.axsdict", true); }) == Errc::IncompleteFingerspellSet);
}

TEST_CASE("compile, load and lookup is bit-exact") {
  axs_test::TempDir dir("roundtrip");
  auto paths = write_synthetic_corpus(dir.path / "in", corpus_glosses({"HELLO", "THANK_YOU"}),
                                      {.drop_left_hand_every = 4});
  compile_dictionary(dir.path / "in", dir.path / "d.axsdict");
  auto dict = load_dictionary(dir.path / "d.axsdict");
  CHECK(dict.size() == 38);
  for (const auto& p : paths) {
    auto expect = build_clip(parse_landmark_file(p));
    const auto* got = dict.find(expect.gloss_id);
    REQUIRE(got);
    CHECK(got->frames == expect.frames);
  }
}

TEST_CASE("empty input directory") {
  axs_test::TempDir dir("empty");
  CHECK(code_of([&] { compile_dictionary(dir.path, dir.path / "x.axsdict"); }) == Errc::NoInputs);
}
