#include "axs/synthetic_signs.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "axs/error.hpp"
#include "axs/signgen.hpp"
#include "axs/skeleton.hpp"

namespace axs {

namespace {

using json = nlohmann::json;

struct P {
  double x, y, z;
};

// Seated upper-body rest pose in image coordinates (y down).
constexpr std::array<P, kPoseLandmarks> kRestPose = {{
    {0.50, 0.30, -0.10}, {0.52, 0.28, -0.09}, {0.53, 0.28, -0.09}, {0.54, 0.28, -0.09}, {0.48, 0.28, -0.09},
    {0.47, 0.28, -0.09}, {0.46, 0.28, -0.09}, {0.56, 0.30, -0.02}, {0.44, 0.30, -0.02}, {0.52, 0.34, -0.08},
    {0.48, 0.34, -0.08}, {0.60, 0.45, 0.00},  {0.40, 0.45, 0.00},  {0.66, 0.60, 0.02},  {0.34, 0.60, 0.02},
    {0.62, 0.72, -0.02}, {0.38, 0.72, -0.02}, {0.63, 0.75, -0.03}, {0.37, 0.75, -0.03}, {0.62, 0.76, -0.03},
    {0.38, 0.76, -0.03}, {0.61, 0.74, -0.03}, {0.39, 0.74, -0.03}, {0.57, 0.85, 0.00},  {0.43, 0.85, 0.00},
    {0.58, 1.00, 0.02},  {0.42, 1.00, 0.02},  {0.58, 1.15, 0.04},  {0.42, 1.15, 0.04},  {0.59, 1.17, 0.05},
    {0.41, 1.17, 0.05},  {0.57, 1.20, 0.03},  {0.43, 1.20, 0.03},
}};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Motion {
  double amp_x, amp_y, freq, phase, lift, curl_rate;
  static Motion draw(std::mt19937_64& rng) {
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    return {0.03 + 0.08 * u(), 0.02 + 0.06 * u(), 0.5 + 2.0 * u(), 2 * std::numbers::pi * u(), 0.12 + 0.15 * u(),
            0.5 + 2.5 * u()};
  }
};

P wrist_at(const P& rest, const Motion& m, double s, double side) {
  const double w = 2 * std::numbers::pi * m.freq * s + m.phase;
  return {rest.x + side * m.amp_x * std::sin(w) * std::sin(std::numbers::pi * s),
          rest.y - m.lift * std::sin(std::numbers::pi * s * 0.5) + m.amp_y * std::cos(w) * std::sin(std::numbers::pi * s),
          rest.z - 0.05 * std::sin(std::numbers::pi * s)};
}

json hand_points(const P& wrist, double curl, double side) {
  json pts = json::array();
  pts.push_back({wrist.x, wrist.y, wrist.z});
  for (int finger = 0; finger < 5; ++finger) {
    const double spread = (finger - 2) * 0.35;
    for (int joint = 1; joint <= 4; ++joint) {
      const double len = 0.012 * joint;
      const double ang = spread + curl * joint * 0.25;
      pts.push_back({wrist.x + side * len * std::sin(ang), wrist.y - len * std::cos(ang), wrist.z - 0.004 * joint});
    }
  }
  return pts;
}

json face_points(const P& nose) {
  json pts = json::array();
  for (std::size_t i = 0; i < kRawFaceLandmarks; ++i) {
    const double ring = static_cast<double>(i % 12) / 12.0;
    const double ang = 2 * std::numbers::pi * static_cast<double>(i) / 39.0;
    pts.push_back({nose.x + 0.05 * ring * std::cos(ang), nose.y + 0.06 * ring * std::sin(ang), nose.z + 0.01 * ring});
  }
  return pts;
}

}  // namespace

json synthesize_landmark_json(const std::string& gloss, const SyntheticSignOptions& options) {
  std::mt19937_64 rng(fnv1a(gloss) ^ options.seed);
  const Motion left = Motion::draw(rng);
  const Motion right = Motion::draw(rng);

  json frames = json::array();
  const std::size_t total = options.lead_static + options.moving_frames + options.trail_static;
  for (std::size_t i = 0; i < total; ++i) {
    // progress through the sign: 0 during lead-in, 1 during lead-out
    double s = 0.0;
    if (i >= options.lead_static) {
      const auto k = std::min(i - options.lead_static + 1, options.moving_frames);
      s = static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(1, options.moving_frames));
    }
    const double sway = 0.004 * std::sin(2 * std::numbers::pi * s);

    json pose = json::array();
    for (std::size_t j = 0; j < kPoseLandmarks; ++j) {
      P p = kRestPose[j];
      p.x += sway;
      pose.push_back({p.x, p.y, p.z, 0.99});
    }
    const P lw = wrist_at(kRestPose[kLeftWrist], left, s, +1.0);
    const P rw = wrist_at(kRestPose[kRightWrist], right, s, -1.0);
    pose[kLeftWrist] = {lw.x + sway, lw.y, lw.z, 0.99};
    pose[kRightWrist] = {rw.x + sway, rw.y, rw.z, 0.99};
    // elbows halfway between shoulder and wrist, dropped a little
    pose[13] = {(kRestPose[11].x + lw.x) / 2 + 0.03 + sway, (kRestPose[11].y + lw.y) / 2 + 0.05, 0.02, 0.99};
    pose[14] = {(kRestPose[12].x + rw.x) / 2 - 0.03 + sway, (kRestPose[12].y + rw.y) / 2 + 0.05, 0.02, 0.99};

    json frame = {{"pose", pose},
                  {"left_hand", hand_points({lw.x + sway, lw.y, lw.z}, left.curl_rate * s, +1.0)},
                  {"right_hand", hand_points({rw.x + sway, rw.y, rw.z}, right.curl_rate * s, -1.0)},
                  {"face", nullptr}};
    if (options.drop_left_hand_every > 0 && i % options.drop_left_hand_every == options.drop_left_hand_every - 1)
      frame["left_hand"] = nullptr;
    if (options.with_face) frame["face"] = face_points({kRestPose[0].x + sway, kRestPose[0].y, kRestPose[0].z});
    frames.push_back(std::move(frame));
  }
  return {{"gloss", gloss}, {"fps", options.fps}, {"coords", "image"}, {"frames", std::move(frames)}};
}

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir,
                                                          const std::vector<std::string>& glosses,
                                                          const SyntheticSignOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& g : glosses) {
    const auto path = dir / (g + ".json");
    std::ofstream f(path);
    if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
    f << synthesize_landmark_json(g, options).dump();
    out.push_back(path);
  }
  return out;
}

std::vector<std::string> corpus_glosses(const std::vector<std::string>& vocabulary) {
  auto out = fingerspell_glosses();
  out.insert(out.end(), vocabulary.begin(), vocabulary.end());
  return out;
}

}  // namespace axs
